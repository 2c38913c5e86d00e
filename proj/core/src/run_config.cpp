#include "sne/run_config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "sne/common.hpp"

namespace sne {

namespace {

using i64 = std::int64_t;

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const double v = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ValidationError("config: key '" + key + "' needs a number, got '" + value + "'");
    }
}

i64 parse_int(const std::string& key, const std::string& value) {
    i64 v = 0;
    const auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
    if (ec != std::errc() || p != value.data() + value.size())
        throw ValidationError("config: key '" + key + "' needs an integer, got '" + value + "'");
    return v;
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
    std::uint64_t v = 0;
    const auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
    if (ec != std::errc() || p != value.data() + value.size())
        throw ValidationError("config: key '" + key + "' needs an unsigned integer, got '" +
                              value + "'");
    return v;
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    throw ValidationError("config: key '" + key + "' needs true/false, got '" + value + "'");
}

std::vector<i64> parse_int_list(const std::string& key, const std::string& value) {
    std::vector<i64> out;
    if (trim(value).empty()) return out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_int(key, trim(item)));
    return out;
}

std::string join_ints(const std::vector<i64>& v) {
    std::ostringstream out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out << ",";
        out << v[i];
    }
    return out.str();
}

}  // namespace

const std::vector<std::string>& RunConfig::key_names() {
    static const std::vector<std::string> keys{
        "batch_size",   "chunksize",     "encoder",        "encoding_size", "epochs",
        "grad_clip",    "heads",         "layer_norm",     "lr",            "lr_gamma",
        "mask_pad",     "max_level",     "milestones",     "pma_seed_size", "pos_enc_level",
        "pos_enc_type", "predictor_hidden", "sab_blocks",  "sab_hidden",    "seed",
        "threads",      "weight_decay"};
    return keys;
}

void RunConfig::set(const std::string& key, const std::string& value) {
    if (key == "encoder") {
        encoder = value;  // name checked in validate(), so bad values still parse
    } else if (key == "lr") {
        lr = parse_double(key, value);
    } else if (key == "batch_size") {
        batch_size = parse_int(key, value);
    } else if (key == "epochs") {
        epochs = parse_int(key, value);
    } else if (key == "encoding_size") {
        encoding_size = parse_int(key, value);
    } else if (key == "sab_hidden") {
        sab_hidden = parse_int(key, value);
    } else if (key == "pma_seed_size") {
        pma_seed_size = parse_int(key, value);
    } else if (key == "sab_blocks") {
        sab_blocks = parse_int(key, value);
    } else if (key == "chunksize") {
        chunksize = parse_int(key, value);
    } else if (key == "layer_norm") {
        layer_norm = parse_bool(key, value);
    } else if (key == "heads") {
        heads = parse_int(key, value);
    } else if (key == "pos_enc_type") {
        pos_enc_type = parse_bool(key, value);
    } else if (key == "pos_enc_level") {
        pos_enc_level = parse_bool(key, value);
    } else if (key == "mask_pad") {
        mask_pad = parse_bool(key, value);
    } else if (key == "max_level") {
        max_level = parse_int(key, value);
    } else if (key == "predictor_hidden") {
        predictor_hidden = parse_int(key, value);
    } else if (key == "milestones") {
        milestones = parse_int_list(key, value);
    } else if (key == "lr_gamma") {
        lr_gamma = parse_double(key, value);
    } else if (key == "weight_decay") {
        weight_decay = parse_double(key, value);
    } else if (key == "grad_clip") {
        grad_clip = parse_double(key, value);
    } else if (key == "seed") {
        seed = parse_u64(key, value);
    } else if (key == "threads") {
        threads = parse_int(key, value);
    } else {
        throw ValidationError("config: unknown key '" + key + "'");
    }
}

void RunConfig::validate() const {
    if (pma_seed_size != encoding_size)
        throw ValidationError(
            "config: pma_seed_size must equal encoding_size (the final pooling seed and the "
            "encoding share one width; shrink both together)");
    if (threads < 1) throw ValidationError("config: threads must be >= 1");
    to_train_config().validate();
}

TrainConfig RunConfig::to_train_config() const {
    TrainConfig c;
    c.encoder = encoder_kind_from_name(encoder);
    c.sne.h = sab_hidden;
    c.sne.H = encoding_size;
    c.sne.heads = heads;
    c.sne.chunksize = chunksize;
    c.sne.sab_blocks = sab_blocks;
    c.sne.use_layer_norm = layer_norm;
    c.sne.pos_enc_type = pos_enc_type;
    c.sne.pos_enc_level = pos_enc_level;
    c.sne.mask_pad = mask_pad;
    c.sne.max_level = max_level;
    c.predictor_hidden = predictor_hidden;
    c.lr = lr;
    c.batch_size = batch_size;
    c.epochs = epochs;
    c.milestones = milestones;
    c.lr_gamma = lr_gamma;
    c.weight_decay = weight_decay;
    c.grad_clip = grad_clip;
    c.seed = seed;
    return c;
}

std::string RunConfig::to_text() const {
    std::ostringstream out;
    out << "batch_size = " << batch_size << "\n";
    out << "chunksize = " << chunksize << "\n";
    out << "encoder = " << encoder << "\n";
    out << "encoding_size = " << encoding_size << "\n";
    out << "epochs = " << epochs << "\n";
    out << "grad_clip = " << format_double(grad_clip) << "\n";
    out << "heads = " << heads << "\n";
    out << "layer_norm = " << (layer_norm ? "true" : "false") << "\n";
    out << "lr = " << format_double(lr) << "\n";
    out << "lr_gamma = " << format_double(lr_gamma) << "\n";
    out << "mask_pad = " << (mask_pad ? "true" : "false") << "\n";
    out << "max_level = " << max_level << "\n";
    out << "milestones = " << join_ints(milestones) << "\n";
    out << "pma_seed_size = " << pma_seed_size << "\n";
    out << "pos_enc_level = " << (pos_enc_level ? "true" : "false") << "\n";
    out << "pos_enc_type = " << (pos_enc_type ? "true" : "false") << "\n";
    out << "predictor_hidden = " << predictor_hidden << "\n";
    out << "sab_blocks = " << sab_blocks << "\n";
    out << "sab_hidden = " << sab_hidden << "\n";
    out << "seed = " << seed << "\n";
    out << "threads = " << threads << "\n";
    out << "weight_decay = " << format_double(weight_decay) << "\n";
    return out.str();
}

std::uint64_t RunConfig::fingerprint() const { return fnv1a64(to_text()); }

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config '" + path + "'");
    RunConfig config;
    std::string line;
    std::int64_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        const std::string text = trim(line);
        if (text.empty()) continue;
        const auto eq = text.find('=');
        if (eq == std::string::npos)
            throw ValidationError("config '" + path + "' line " + std::to_string(lineno) +
                                  ": expected key=value");
        config.set(trim(text.substr(0, eq)), trim(text.substr(eq + 1)));
    }
    return config;
}

void apply_overrides(RunConfig& config, const std::vector<std::string>& overrides) {
    for (const auto& kv : overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos)
            throw ValidationError("override '" + kv + "': expected key=value");
        config.set(trim(kv.substr(0, eq)), trim(kv.substr(eq + 1)));
    }
}

}  // namespace sne
