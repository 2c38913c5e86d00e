#include "sne/artifact.hpp"

#include <cstring>
#include <fstream>

#include <nlohmann/json.hpp>

#include "sne/common.hpp"

namespace sne {

namespace {

using i64 = std::int64_t;
using json = nlohmann::json;

constexpr char kMagic[8] = {'S', 'N', 'E', 'A', 'R', 'T', 'F', '\0'};
constexpr std::uint32_t kVersion = 1;

// --- little-endian byte stream helpers ---

void put_bytes(std::vector<std::uint8_t>& out, const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    out.insert(out.end(), b, b + n);
}

template <typename T>
void put(std::vector<std::uint8_t>& out, T v) {
    static_assert(std::is_trivially_copyable_v<T>);
    put_bytes(out, &v, sizeof(T));
}

void put_string(std::vector<std::uint8_t>& out, const std::string& s) {
    put<std::uint64_t>(out, s.size());
    put_bytes(out, s.data(), s.size());
}

void put_doubles(std::vector<std::uint8_t>& out, const std::vector<double>& v) {
    put<std::uint64_t>(out, v.size());
    put_bytes(out, v.data(), v.size() * sizeof(double));
}

struct Reader {
    const std::vector<std::uint8_t>& bytes;
    std::size_t at = 0;

    void need(std::size_t n) const {
        if (at + n > bytes.size()) throw IoError("artifact: truncated stream");
    }
    template <typename T>
    T get() {
        static_assert(std::is_trivially_copyable_v<T>);
        need(sizeof(T));
        T v;
        std::memcpy(&v, bytes.data() + at, sizeof(T));
        at += sizeof(T);
        return v;
    }
    std::string get_string() {
        const auto n = get<std::uint64_t>();
        need(n);
        std::string s(reinterpret_cast<const char*>(bytes.data() + at), n);
        at += n;
        return s;
    }
    std::vector<double> get_doubles() {
        const auto n = get<std::uint64_t>();
        if (n > (1ULL << 30)) throw IoError("artifact: implausible vector length");
        need(n * sizeof(double));
        std::vector<double> v(n);
        std::memcpy(v.data(), bytes.data() + at, n * sizeof(double));
        at += n * sizeof(double);
        return v;
    }
};

void put_param_block(std::vector<std::uint8_t>& out, const std::vector<std::vector<double>>& ps) {
    put<std::uint64_t>(out, ps.size());
    for (const auto& p : ps) put_doubles(out, p);
}

std::vector<std::vector<double>> get_param_block(Reader& r) {
    const auto n = r.get<std::uint64_t>();
    if (n > (1ULL << 20)) throw IoError("artifact: implausible parameter count");
    std::vector<std::vector<double>> ps(n);
    for (auto& p : ps) p = r.get_doubles();
    return ps;
}

std::vector<std::vector<double>> tensor_data(const std::vector<Tensor>& ts) {
    std::vector<std::vector<double>> out;
    out.reserve(ts.size());
    for (const auto& t : ts) out.push_back(t.data());
    return out;
}

json sne_config_json(const SneConfig& c) {
    return json{{"H", c.H},
                {"chunksize", c.chunksize},
                {"h", c.h},
                {"heads", c.heads},
                {"mask_pad", c.mask_pad},
                {"max_level", c.max_level},
                {"pos_enc_level", c.pos_enc_level},
                {"pos_enc_type", c.pos_enc_type},
                {"sab_blocks", c.sab_blocks},
                {"use_layer_norm", c.use_layer_norm}};
}

SneConfig sne_config_from(const json& j) {
    SneConfig c;
    c.H = j.at("H").get<i64>();
    c.chunksize = j.at("chunksize").get<i64>();
    c.h = j.at("h").get<i64>();
    c.heads = j.at("heads").get<i64>();
    c.mask_pad = j.at("mask_pad").get<bool>();
    c.max_level = j.at("max_level").get<i64>();
    c.pos_enc_level = j.at("pos_enc_level").get<bool>();
    c.pos_enc_type = j.at("pos_enc_type").get<bool>();
    c.sab_blocks = j.at("sab_blocks").get<i64>();
    c.use_layer_norm = j.at("use_layer_norm").get<bool>();
    return c;
}

}  // namespace

std::string train_config_to_json(const TrainConfig& c) {
    const json j{{"batch_size", c.batch_size},
                 {"encoder", encoder_kind_name(c.encoder)},
                 {"epochs", c.epochs},
                 {"grad_clip", c.grad_clip},
                 {"lr", c.lr},
                 {"lr_gamma", c.lr_gamma},
                 {"milestones", c.milestones},
                 {"predictor_hidden", c.predictor_hidden},
                 {"seed", c.seed},
                 {"sne", sne_config_json(c.sne)},
                 {"weight_decay", c.weight_decay}};
    return j.dump();
}

TrainConfig train_config_from_json(const std::string& text) {
    try {
        const json j = json::parse(text);
        TrainConfig c;
        c.batch_size = j.at("batch_size").get<i64>();
        c.encoder = encoder_kind_from_name(j.at("encoder").get<std::string>());
        c.epochs = j.at("epochs").get<i64>();
        c.grad_clip = j.at("grad_clip").get<double>();
        c.lr = j.at("lr").get<double>();
        c.lr_gamma = j.at("lr_gamma").get<double>();
        c.milestones = j.at("milestones").get<std::vector<i64>>();
        c.predictor_hidden = j.at("predictor_hidden").get<i64>();
        c.seed = j.at("seed").get<std::uint64_t>();
        c.sne = sne_config_from(j.at("sne"));
        c.weight_decay = j.at("weight_decay").get<double>();
        return c;
    } catch (const json::exception& e) {
        throw IoError(std::string("artifact: bad train config: ") + e.what());
    }
}

std::uint64_t config_fingerprint(const TrainConfig& config) {
    return fnv1a64(train_config_to_json(config));
}

void save_artifact(const TrainedPredictor& tp, const std::string& path) {
    std::vector<std::uint8_t> out;
    put_bytes(out, kMagic, sizeof(kMagic));
    put<std::uint32_t>(out, kVersion);
    put_string(out, train_config_to_json(tp.config));
    put_string(out, tp.source_id);
    put<i64>(out, tp.epochs_done);

    // baseline lock data (empty strings/zeros for the set encoder)
    put_string(out, tp.encoder == EncoderKind::sne ? std::string() : tp.baseline.signature);
    put<i64>(out, tp.encoder == EncoderKind::sne ? 0 : tp.baseline.feature_dim);

    put_param_block(out, tensor_data(tp.best_parameters()));
    put_param_block(out, tp.last_params);

    put<i64>(out, tp.adam.step);
    put<double>(out, tp.adam.beta1);
    put<double>(out, tp.adam.beta2);
    put<double>(out, tp.adam.eps);
    put_param_block(out, tp.adam.m);
    put_param_block(out, tp.adam.v);

    put_doubles(out, tp.history.train_loss);
    put_doubles(out, tp.history.val_loss);
    put_doubles(out, tp.history.val_tau);
    put_doubles(out, tp.history.lr);
    put<i64>(out, tp.history.best_epoch);
    put<double>(out, tp.history.best_val_tau);
    put<std::uint8_t>(out, tp.history.diverged ? 1 : 0);

    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open '" + path + "' for writing");
    f.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
    if (!f) throw IoError("write failed for '" + path + "'");
}

TrainedPredictor load_artifact(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open artifact '" + path + "'");
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)),
                                    std::istreambuf_iterator<char>());
    Reader r{bytes};

    char magic[8];
    r.need(sizeof(magic));
    std::memcpy(magic, bytes.data(), sizeof(magic));
    r.at += sizeof(magic);
    if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw IoError("'" + path + "' is not an artifact file");
    const auto version = r.get<std::uint32_t>();
    if (version != kVersion)
        throw IoError("artifact '" + path + "': unsupported version " + std::to_string(version));

    TrainedPredictor tp;
    tp.config = train_config_from_json(r.get_string());
    tp.encoder = tp.config.encoder;
    tp.source_id = r.get_string();
    tp.epochs_done = r.get<i64>();

    const std::string signature = r.get_string();
    const i64 feature_dim = r.get<i64>();

    Rng rng(0);  // placeholder weights, overwritten below
    if (tp.encoder == EncoderKind::sne) {
        tp.sne = SneParams::init(tp.config.sne, rng);
    } else {
        tp.baseline.kind = tp.encoder;
        tp.baseline.signature = signature;
        tp.baseline.feature_dim = feature_dim;
        tp.baseline.out_width = tp.config.sne.H;
        tp.baseline.lift_w = Tensor::zeros({tp.config.sne.H, feature_dim}, true);
        tp.baseline.lift_b = Tensor::zeros({tp.config.sne.H}, true);
    }
    tp.predictor = PredictorParams::init({tp.config.sne.H, tp.config.predictor_hidden}, rng);

    const auto best = get_param_block(r);
    std::vector<Tensor> params = tp.best_parameters();
    if (params.size() != best.size())
        throw IoError("artifact '" + path + "': parameter count does not match its config");
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (params[i].data().size() != best[i].size())
            throw IoError("artifact '" + path + "': parameter " + std::to_string(i) +
                          " has the wrong size");
        params[i].mutable_data() = best[i];
    }

    tp.last_params = get_param_block(r);
    tp.adam.step = r.get<i64>();
    tp.adam.beta1 = r.get<double>();
    tp.adam.beta2 = r.get<double>();
    tp.adam.eps = r.get<double>();
    tp.adam.m = get_param_block(r);
    tp.adam.v = get_param_block(r);

    tp.history.train_loss = r.get_doubles();
    tp.history.val_loss = r.get_doubles();
    tp.history.val_tau = r.get_doubles();
    tp.history.lr = r.get_doubles();
    tp.history.best_epoch = r.get<i64>();
    tp.history.best_val_tau = r.get<double>();
    tp.history.diverged = r.get<std::uint8_t>() != 0;

    if (r.at != bytes.size()) throw IoError("artifact '" + path + "': trailing bytes");
    return tp;
}

}  // namespace sne
