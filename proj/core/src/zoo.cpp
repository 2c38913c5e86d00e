#include "sne/zoo.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "sne/common.hpp"
#include "sne/ops.hpp"
#include "sne/optim.hpp"
#include "sne/tensor.hpp"
#include "sne/threadpool.hpp"

namespace fs = std::filesystem;

namespace sne {

namespace {

using i64 = std::int64_t;
using json = nlohmann::json;

bool contains(const std::vector<std::string>& v, const std::string& s) {
    return std::find(v.begin(), v.end(), s) != v.end();
}

const std::vector<std::string> kKnownInits{"xavier_uniform", "xavier_normal", "he_uniform",
                                           "he_normal"};
const std::vector<std::string> kKnownActivations{"relu", "tanh", "leaky_relu", "sigmoid"};

std::string checkpoint_rel(i64 index) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "checkpoints/ckpt_%05lld.bin",
                  static_cast<long long>(index));
    return buf;
}

TraineeHyper sample_hyper(const HyperRanges& r, Rng& rng) {
    TraineeHyper h;
    h.lr = rng.log_uniform(r.lr_min, r.lr_max);
    h.weight_decay = rng.uniform(r.weight_decay_min, r.weight_decay_max);
    h.dropout = rng.uniform(r.dropout_min, r.dropout_max);
    h.init_scheme = r.init_schemes[static_cast<std::size_t>(
        rng.uniform_int(0, static_cast<i64>(r.init_schemes.size()) - 1))];
    h.init_scale = rng.log_uniform(r.init_scale_min, r.init_scale_max);
    h.activation = r.activations[static_cast<std::size_t>(
        rng.uniform_int(0, static_cast<i64>(r.activations.size()) - 1))];
    h.epochs = rng.uniform_int(r.epochs_min, r.epochs_max);
    return h;
}

Tensor apply_act(const Tensor& x, const std::string& act) {
    if (act == "relu") return relu(x);
    if (act == "tanh") return tanh_op(x);
    if (act == "leaky_relu") return leaky_relu(x, 0.1);
    if (act == "sigmoid") return sigmoid(x);
    throw ValidationError("unknown activation '" + act + "'");
}

// params holds weight, bias per layer in architecture order.
Tensor trainee_forward(const std::string& arch_id, const std::vector<Tensor>& p, const Tensor& x,
                       const std::string& act, double dropout_p, Rng* drop_rng) {
    if (arch_id == "arch1") {
        Tensor h = apply_act(conv2d(x, p[0], &p[1], 1, 0), act);
        h = apply_act(conv2d(h, p[2], &p[3], 1, 0), act);
        h = apply_act(conv2d(h, p[4], &p[5], 1, 0), act);
        h = global_avg_pool(h);
        if (dropout_p > 0.0 && drop_rng) h = dropout(h, dropout_p, *drop_rng);
        return linear(h, p[6], &p[7]);
    }
    if (arch_id == "arch2") {
        Tensor h = conv2d(x, p[0], &p[1], 1, 0);
        h = apply_act(maxpool2d(h, 2, 2), act);
        h = conv2d(h, p[2], &p[3], 1, 0);
        h = apply_act(maxpool2d(h, 2, 2), act);
        h = apply_act(conv2d(h, p[4], &p[5], 1, 0), act);
        h = reshape(h, {h.shape()[0], h.numel() / h.shape()[0]});
        h = apply_act(linear(h, p[6], &p[7]), act);
        if (dropout_p > 0.0 && drop_rng) h = dropout(h, dropout_p, *drop_rng);
        return linear(h, p[8], &p[9]);
    }
    throw ValidationError("unknown architecture '" + arch_id + "'");
}

// Centered near the dark background level rather than mid-scale: the canvas
// is mostly background, and a strongly negative input mean starves relu
// trainees of gradient.
Tensor make_batch(const SyntheticDataset& ds, const std::vector<double>& images,
                  const std::vector<i64>& idx) {
    const i64 isz = ds.image_size();
    std::vector<double> buf(static_cast<std::size_t>(static_cast<i64>(idx.size()) * isz));
    for (std::size_t i = 0; i < idx.size(); ++i)
        for (i64 p = 0; p < isz; ++p)
            buf[i * static_cast<std::size_t>(isz) + static_cast<std::size_t>(p)] =
                (images[static_cast<std::size_t>(idx[i] * isz + p)] - 0.2) * 2.0;
    return Tensor({static_cast<i64>(idx.size()), ds.channels, ds.height, ds.width},
                  std::move(buf));
}

std::vector<Tensor> model_tensors(const CheckpointModel& model, bool requires_grad) {
    std::vector<Tensor> params;
    for (const auto& l : model.layers) {
        params.emplace_back(l.shape, l.weights, requires_grad);
        if (l.bias) params.emplace_back(Shape{l.out_dim()}, *l.bias, requires_grad);
    }
    return params;
}

void tensors_into_model(const std::vector<Tensor>& params, CheckpointModel& model) {
    std::size_t k = 0;
    for (auto& l : model.layers) {
        l.weights = params[k++].data();
        if (l.bias) *l.bias = params[k++].data();
    }
}

double accuracy_of(const std::string& arch_id, const std::vector<Tensor>& params,
                   const SyntheticDataset& ds, const std::vector<double>& images,
                   const std::vector<int>& labels, const std::string& act) {
    NoGradGuard guard;
    const i64 n = static_cast<i64>(labels.size());
    i64 correct = 0;
    for (i64 b0 = 0; b0 < n; b0 += 64) {
        const i64 bn = std::min<i64>(64, n - b0);
        std::vector<i64> idx(static_cast<std::size_t>(bn));
        std::iota(idx.begin(), idx.end(), b0);
        Tensor logits = trainee_forward(arch_id, params, make_batch(ds, images, idx), act, 0.0,
                                        nullptr);
        std::vector<int> pred = argmax_rows(logits);
        for (i64 i = 0; i < bn; ++i)
            if (pred[static_cast<std::size_t>(i)] == labels[static_cast<std::size_t>(b0 + i)])
                ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(n);
}

std::map<std::string, std::string> hyper_metadata(const TraineeHyper& h) {
    return {{"activation", h.activation},
            {"dropout", format_double(h.dropout)},
            {"epochs", std::to_string(h.epochs)},
            {"init_scale", format_double(h.init_scale)},
            {"init_scheme", h.init_scheme},
            {"lr", format_double(h.lr)},
            {"weight_decay", format_double(h.weight_decay)}};
}

json hyper_to_json(const TraineeHyper& h) {
    return json{{"activation", h.activation}, {"dropout", h.dropout},
                {"epochs", h.epochs},         {"init_scale", h.init_scale},
                {"init_scheme", h.init_scheme}, {"lr", h.lr},
                {"weight_decay", h.weight_decay}};
}

TraineeHyper hyper_from_json(const json& j) {
    TraineeHyper h;
    h.activation = j.at("activation").get<std::string>();
    h.dropout = j.at("dropout").get<double>();
    h.epochs = j.at("epochs").get<i64>();
    h.init_scale = j.at("init_scale").get<double>();
    h.init_scheme = j.at("init_scheme").get<std::string>();
    h.lr = j.at("lr").get<double>();
    h.weight_decay = j.at("weight_decay").get<double>();
    return h;
}

json zoo_spec_json(const ZooSpec& s) {
    return json{{"architecture", s.architecture},
                {"batch_size", s.batch_size},
                {"dataset", s.dataset},
                {"dataset_seed", s.dataset_seed},
                {"grad_clip", s.grad_clip},
                {"population", s.population},
                {"ranges",
                 json{{"activations", s.ranges.activations},
                      {"dropout_max", s.ranges.dropout_max},
                      {"dropout_min", s.ranges.dropout_min},
                      {"epochs_max", s.ranges.epochs_max},
                      {"epochs_min", s.ranges.epochs_min},
                      {"init_scale_max", s.ranges.init_scale_max},
                      {"init_scale_min", s.ranges.init_scale_min},
                      {"init_schemes", s.ranges.init_schemes},
                      {"lr_max", s.ranges.lr_max},
                      {"lr_min", s.ranges.lr_min},
                      {"weight_decay_max", s.ranges.weight_decay_max},
                      {"weight_decay_min", s.ranges.weight_decay_min}}},
                {"seed", s.seed},
                {"test_fraction", s.test_fraction},
                {"test_images", s.test_images},
                {"train_fraction", s.train_fraction},
                {"train_images", s.train_images},
                {"val_fraction", s.val_fraction}};
}

ZooSpec zoo_spec_from_json(const json& j) {
    ZooSpec s;
    s.architecture = j.at("architecture").get<std::string>();
    s.batch_size = j.at("batch_size").get<i64>();
    s.dataset = j.at("dataset").get<std::string>();
    s.dataset_seed = j.at("dataset_seed").get<std::uint64_t>();
    s.grad_clip = j.at("grad_clip").get<double>();
    s.population = j.at("population").get<i64>();
    const json& r = j.at("ranges");
    s.ranges.activations = r.at("activations").get<std::vector<std::string>>();
    s.ranges.dropout_max = r.at("dropout_max").get<double>();
    s.ranges.dropout_min = r.at("dropout_min").get<double>();
    s.ranges.epochs_max = r.at("epochs_max").get<i64>();
    s.ranges.epochs_min = r.at("epochs_min").get<i64>();
    s.ranges.init_scale_max = r.at("init_scale_max").get<double>();
    s.ranges.init_scale_min = r.at("init_scale_min").get<double>();
    s.ranges.init_schemes = r.at("init_schemes").get<std::vector<std::string>>();
    s.ranges.lr_max = r.at("lr_max").get<double>();
    s.ranges.lr_min = r.at("lr_min").get<double>();
    s.ranges.weight_decay_max = r.at("weight_decay_max").get<double>();
    s.ranges.weight_decay_min = r.at("weight_decay_min").get<double>();
    s.seed = j.at("seed").get<std::uint64_t>();
    s.test_fraction = j.at("test_fraction").get<double>();
    s.test_images = j.at("test_images").get<i64>();
    s.train_fraction = j.at("train_fraction").get<double>();
    s.train_images = j.at("train_images").get<i64>();
    s.val_fraction = j.at("val_fraction").get<double>();
    return s;
}

void write_text_atomic(const fs::path& path, const std::string& text) {
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open '" + tmp.string() + "' for writing");
        out << text;
        if (!out) throw IoError("write failed for '" + tmp.string() + "'");
    }
    fs::rename(tmp, path);
}

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

void HyperRanges::validate() const {
    if (!(lr_min > 0.0) || lr_max < lr_min)
        throw ValidationError("hyper ranges: need 0 < lr_min <= lr_max");
    if (weight_decay_min < 0.0 || weight_decay_max < weight_decay_min)
        throw ValidationError("hyper ranges: bad weight decay range");
    if (dropout_min < 0.0 || dropout_max < dropout_min || dropout_max >= 1.0)
        throw ValidationError("hyper ranges: dropout must sit in [0, 1)");
    if (!(init_scale_min > 0.0) || init_scale_max < init_scale_min)
        throw ValidationError("hyper ranges: need 0 < init_scale_min <= init_scale_max");
    if (init_schemes.empty() || activations.empty())
        throw ValidationError("hyper ranges: scheme/activation lists must be non-empty");
    for (const auto& s : init_schemes)
        if (!contains(kKnownInits, s)) throw ValidationError("unknown init scheme '" + s + "'");
    for (const auto& a : activations)
        if (!contains(kKnownActivations, a))
            throw ValidationError("unknown activation '" + a + "'");
    if (epochs_min < 1 || epochs_max < epochs_min)
        throw ValidationError("hyper ranges: need 1 <= epochs_min <= epochs_max");
}

void ZooSpec::validate() const {
    if (architecture != "arch1" && architecture != "arch2")
        throw ValidationError("unknown architecture '" + architecture + "'");
    if (!contains(dataset_registry(), dataset))
        throw ValidationError("unknown dataset generator '" + dataset + "'");
    if (population < 1) throw ValidationError("zoo population must be positive");
    if (train_fraction < 0.0 || val_fraction < 0.0 || test_fraction < 0.0 ||
        std::abs(train_fraction + val_fraction + test_fraction - 1.0) > 1e-9)
        throw ValidationError("split fractions must be non-negative and sum to 1");
    if (train_images < 1 || test_images < 1)
        throw ValidationError("dataset image counts must be positive");
    if (batch_size < 1) throw ValidationError("trainee batch size must be positive");
    if (grad_clip < 0.0) throw ValidationError("grad_clip must be >= 0");
    ranges.validate();
}

std::int64_t ZooSpec::channels() const { return architecture == "arch1" ? 1 : 3; }

CheckpointModel build_arch(const std::string& arch_id, std::int64_t in_channels) {
    if (in_channels != 1 && in_channels != 3)
        throw ValidationError("build_arch: in_channels must be 1 or 3");
    auto conv = [](i64 co, i64 ci, i64 k) {
        LayerRecord l;
        l.kind = LayerKind::conv2d;
        l.shape = {co, ci, k, k};
        l.weights.assign(static_cast<std::size_t>(co * ci * k * k), 0.0);
        l.bias = std::vector<double>(static_cast<std::size_t>(co), 0.0);
        return l;
    };
    auto lin = [](i64 out, i64 in) {
        LayerRecord l;
        l.kind = LayerKind::linear;
        l.shape = {out, in};
        l.weights.assign(static_cast<std::size_t>(out * in), 0.0);
        l.bias = std::vector<double>(static_cast<std::size_t>(out), 0.0);
        return l;
    };
    CheckpointModel m;
    m.arch_id = arch_id;
    if (arch_id == "arch1") {
        m.layers = {conv(16, in_channels, 3), conv(16, 16, 3), conv(16, 16, 3), lin(10, 16)};
    } else if (arch_id == "arch2") {
        m.layers = {conv(8, in_channels, 5), conv(6, 8, 5), conv(4, 6, 2), lin(20, 36),
                    lin(10, 20)};
    } else {
        throw ValidationError("unknown architecture '" + arch_id + "'");
    }
    for (std::size_t i = 0; i < m.layers.size(); ++i)
        m.layers[i].layer_index = static_cast<i64>(i);
    return m;
}

void init_weights(CheckpointModel& model, const TraineeHyper& hyper, Rng& rng) {
    for (auto& l : model.layers) {
        i64 fan_in = 0, fan_out = 0;
        if (l.kind == LayerKind::conv2d) {
            const i64 ksq = l.shape[2] * l.shape[3];
            fan_in = l.shape[1] * ksq;
            fan_out = l.shape[0] * ksq;
        } else {
            fan_in = l.shape[1];
            fan_out = l.shape[0];
        }
        const double scale = hyper.init_scale;
        if (hyper.init_scheme == "xavier_uniform") {
            const double lim = scale * std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
            for (auto& w : l.weights) w = rng.uniform(-lim, lim);
        } else if (hyper.init_scheme == "xavier_normal") {
            const double std_ = scale * std::sqrt(2.0 / static_cast<double>(fan_in + fan_out));
            for (auto& w : l.weights) w = rng.normal(0.0, std_);
        } else if (hyper.init_scheme == "he_uniform") {
            const double lim = scale * std::sqrt(6.0 / static_cast<double>(fan_in));
            for (auto& w : l.weights) w = rng.uniform(-lim, lim);
        } else if (hyper.init_scheme == "he_normal") {
            const double std_ = scale * std::sqrt(2.0 / static_cast<double>(fan_in));
            for (auto& w : l.weights) w = rng.normal(0.0, std_);
        } else {
            throw ValidationError("unknown init scheme '" + hyper.init_scheme + "'");
        }
        if (l.bias) std::fill(l.bias->begin(), l.bias->end(), 0.0);
    }
}

TraineeResult train_trainee(const std::string& arch_id, const SyntheticDataset& data,
                            const TraineeHyper& hyper, std::uint64_t seed,
                            std::int64_t batch_size, double grad_clip) {
    Rng rng(seed);
    CheckpointModel skel = build_arch(arch_id, data.channels);
    init_weights(skel, hyper, rng);
    std::vector<Tensor> params = model_tensors(skel, true);

    TraineeResult out;
    const i64 n = static_cast<i64>(data.train_labels.size());
    std::vector<i64> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::vector<std::vector<double>> last_good;
    last_good.reserve(params.size());
    for (const auto& p : params) last_good.push_back(p.data());

    try {
        for (i64 epoch = 0; epoch < hyper.epochs; ++epoch) {
            rng.shuffle(order);
            for (i64 b0 = 0; b0 < n; b0 += batch_size) {
                const i64 bn = std::min(batch_size, n - b0);
                std::vector<i64> idx(order.begin() + b0, order.begin() + b0 + bn);
                std::vector<int> yb(static_cast<std::size_t>(bn));
                for (i64 i = 0; i < bn; ++i)
                    yb[static_cast<std::size_t>(i)] =
                        data.train_labels[static_cast<std::size_t>(idx[static_cast<std::size_t>(i)])];
                Tensor logits = trainee_forward(arch_id, params, make_batch(data, data.train_images, idx),
                                                hyper.activation, hyper.dropout, &rng);
                Tensor loss = cross_entropy_logits(logits, yb);
                zero_grads(params);
                backward(loss);
                if (grad_clip > 0.0) clip_grad_norm(params, grad_clip);
                sgd_step(params, hyper.lr, hyper.weight_decay);
                ++out.steps;
                for (std::size_t p = 0; p < params.size(); ++p) last_good[p] = params[p].data();
            }
        }
    } catch (const NonFiniteError&) {
        out.diverged = true;
        for (std::size_t p = 0; p < params.size(); ++p) params[p].mutable_data() = last_good[p];
    }

    tensors_into_model(params, skel);
    out.test_accuracy = accuracy_of(arch_id, params, data, data.test_images, data.test_labels,
                                    hyper.activation);
    skel.test_accuracy = out.test_accuracy;
    out.model = std::move(skel);
    return out;
}

double evaluate_accuracy(const CheckpointModel& model, const std::string& arch_id,
                         const SyntheticDataset& data) {
    std::vector<Tensor> params = model_tensors(model, false);
    const std::string act = model.hyperparameters.count("activation")
                                ? model.hyperparameters.at("activation")
                                : "relu";
    return accuracy_of(arch_id, params, data, data.test_images, data.test_labels, act);
}

std::vector<std::int64_t> split_counts(std::int64_t population, double train_fraction,
                                       double val_fraction, double test_fraction) {
    if (train_fraction < 0.0 || val_fraction < 0.0 || test_fraction < 0.0 ||
        std::abs(train_fraction + val_fraction + test_fraction - 1.0) > 1e-9)
        throw ValidationError("zoo: split fractions must be non-negative and sum to 1");
    const double f[3] = {train_fraction, val_fraction, test_fraction};
    i64 base[3];
    double rem[3];
    i64 assigned = 0;
    for (int k = 0; k < 3; ++k) {
        const double exact = f[k] * static_cast<double>(population);
        base[k] = static_cast<i64>(std::floor(exact + 1e-9));
        rem[k] = exact - static_cast<double>(base[k]);
        assigned += base[k];
    }
    int order[3] = {0, 1, 2};
    std::stable_sort(order, order + 3, [&](int a, int b) { return rem[a] > rem[b]; });
    for (i64 left = population - assigned, j = 0; left > 0; --left, ++j) ++base[order[j % 3]];
    return {base[0], base[1], base[2]};
}

ZooSummary train_zoo(const ZooSpec& spec, const std::filesystem::path& dir, int threads) {
    spec.validate();
    fs::create_directories(dir / "checkpoints");

    const fs::path spec_path = dir / "zoo.json";
    const std::string snapshot = zoo_spec_json(spec).dump(2) + "\n";
    if (fs::exists(spec_path)) {
        if (read_text(spec_path) != snapshot)
            throw ValidationError("zoo directory '" + dir.string() +
                                  "' was generated from a different spec; refusing to mix");
    } else {
        write_text_atomic(spec_path, snapshot);
    }

    DatasetSpec dspec;
    dspec.generator = spec.dataset;
    dspec.train_count = spec.train_images;
    dspec.test_count = spec.test_images;
    dspec.seed = spec.dataset_seed;
    SyntheticDataset data = generate_dataset(dspec);
    if (spec.channels() == 1) data = grayscale(data);

    const i64 pop = spec.population;
    std::vector<TraineeHyper> hypers(static_cast<std::size_t>(pop));
    Rng hrng(Rng::derive(spec.seed, "zoo/hyper"));
    for (auto& h : hypers) h = sample_hyper(spec.ranges, hrng);

    const auto counts = split_counts(pop, spec.train_fraction, spec.val_fraction,
                                     spec.test_fraction);
    std::vector<std::string> splits(static_cast<std::size_t>(pop));
    {
        std::vector<i64> order(static_cast<std::size_t>(pop));
        std::iota(order.begin(), order.end(), 0);
        Rng srng(Rng::derive(spec.seed, "zoo/split"));
        srng.shuffle(order);
        i64 at = 0;
        const char* names[3] = {"train", "val", "test"};
        for (int k = 0; k < 3; ++k)
            for (i64 j = 0; j < counts[static_cast<std::size_t>(k)]; ++j, ++at)
                splits[static_cast<std::size_t>(order[static_cast<std::size_t>(at)])] = names[k];
    }

    std::vector<ZooRecord> records(static_cast<std::size_t>(pop));
    std::vector<std::uint8_t> reused(static_cast<std::size_t>(pop), 0);
    parallel_for(pop, threads, [&](i64 i) {
        const std::string rel = checkpoint_rel(i);
        const fs::path abs = dir / rel;
        ZooRecord rec;
        rec.index = i;
        rec.checkpoint = rel;
        rec.split = splits[static_cast<std::size_t>(i)];
        rec.hyper = hypers[static_cast<std::size_t>(i)];
        if (fs::exists(abs)) {
            try {
                const CheckpointModel m = load_checkpoint(abs.string());
                rec.test_accuracy = m.test_accuracy;
                rec.failed = m.hyperparameters.count("failed") > 0;
                records[static_cast<std::size_t>(i)] = std::move(rec);
                reused[static_cast<std::size_t>(i)] = 1;
                return;
            } catch (const Error&) {
                // partial or stale file; retrain below
            }
        }
        const std::uint64_t tseed = Rng::derive(spec.seed, "zoo/trainee",
                                                static_cast<std::uint64_t>(i));
        TraineeResult res = train_trainee(spec.architecture, data,
                                          hypers[static_cast<std::size_t>(i)], tseed,
                                          spec.batch_size, spec.grad_clip);
        res.model.arch_id = spec.architecture;
        res.model.dataset_id = spec.dataset;
        res.model.hyperparameters = hyper_metadata(hypers[static_cast<std::size_t>(i)]);
        if (res.diverged) res.model.hyperparameters["failed"] = "1";
        const fs::path tmp = abs.string() + ".tmp";
        save_checkpoint(res.model, tmp.string());
        fs::rename(tmp, abs);
        rec.test_accuracy = res.test_accuracy;
        rec.failed = res.diverged;
        records[static_cast<std::size_t>(i)] = std::move(rec);
    });

    write_manifest(dir, records);

    ZooSummary summary;
    summary.records = std::move(records);
    for (std::size_t i = 0; i < summary.records.size(); ++i) {
        if (summary.records[i].failed) ++summary.failed;
        if (reused[i])
            ++summary.reused;
        else
            ++summary.trained;
    }
    return summary;
}

void write_zoo_spec(const ZooSpec& spec, const std::filesystem::path& path) {
    write_text_atomic(path, zoo_spec_json(spec).dump(2) + "\n");
}

ZooSpec read_zoo_spec(const std::filesystem::path& path) {
    json j;
    try {
        j = json::parse(read_text(path));
        return zoo_spec_from_json(j);
    } catch (const json::exception& e) {
        throw IoError("cannot parse zoo spec '" + path.string() + "': " + e.what());
    }
}

std::vector<ZooRecord> read_manifest(const std::filesystem::path& zoo_dir) {
    const fs::path path = zoo_dir / "manifest.jsonl";
    std::ifstream in(path);
    if (!in) throw IoError("cannot open manifest '" + path.string() + "'");
    std::vector<ZooRecord> records;
    std::string line;
    i64 lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
            const json j = json::parse(line);
            ZooRecord rec;
            rec.index = j.at("index").get<i64>();
            rec.checkpoint = j.at("checkpoint").get<std::string>();
            rec.test_accuracy = j.at("y").get<double>();
            rec.split = j.at("split").get<std::string>();
            rec.failed = j.at("failed").get<bool>();
            rec.hyper = hyper_from_json(j.at("hyper"));
            records.push_back(std::move(rec));
        } catch (const json::exception& e) {
            throw IoError("manifest '" + path.string() + "' line " + std::to_string(lineno) +
                          ": " + e.what());
        }
    }
    return records;
}

void write_manifest(const std::filesystem::path& zoo_dir, const std::vector<ZooRecord>& records) {
    std::ostringstream out;
    for (const auto& rec : records) {
        const json j{{"checkpoint", rec.checkpoint}, {"failed", rec.failed},
                     {"hyper", hyper_to_json(rec.hyper)}, {"index", rec.index},
                     {"split", rec.split},             {"y", rec.test_accuracy}};
        out << j.dump() << "\n";
    }
    write_text_atomic(zoo_dir / "manifest.jsonl", out.str());
}

std::vector<std::int64_t> LoadedZoo::split_indices(const std::string& split) const {
    if (split != "train" && split != "val" && split != "test")
        throw ValidationError("zoo: unknown split '" + split + "'");
    std::vector<i64> idx;
    for (std::size_t i = 0; i < records.size(); ++i)
        if (records[i].split == split) idx.push_back(static_cast<i64>(i));
    return idx;
}

LoadedZoo load_zoo(const std::filesystem::path& dir) {
    LoadedZoo zoo;
    zoo.dir = dir;
    zoo.spec = read_zoo_spec(dir / "zoo.json");
    for (auto& rec : read_manifest(dir)) {
        if (rec.failed) continue;
        zoo.models.push_back(load_checkpoint((dir / rec.checkpoint).string()));
        zoo.records.push_back(std::move(rec));
    }
    if (zoo.records.empty())
        throw ValidationError("zoo '" + dir.string() + "' has no usable records");
    return zoo;
}

}  // namespace sne
