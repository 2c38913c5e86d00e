#include "sne/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "sne/common.hpp"
#include "sne/ops.hpp"

namespace sne {

namespace {

using i64 = std::int64_t;

void stream_stats(const std::vector<double>& values, std::vector<double>& out) {
    i64 n = static_cast<i64>(values.size());
    if (n < 1) throw ValidationError("statnn: empty parameter stream");
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    var /= static_cast<double>(n);
    std::vector<double> sorted(values);
    std::sort(sorted.begin(), sorted.end());
    out.push_back(mean);
    out.push_back(var);
    for (double q : {0.0, 0.25, 0.5, 0.75, 1.0}) {
        double pos = q * static_cast<double>(n - 1);
        i64 lo = static_cast<i64>(pos);
        i64 hi = std::min(lo + 1, n - 1);
        double frac = pos - static_cast<double>(lo);
        out.push_back(sorted[static_cast<std::size_t>(lo)] * (1.0 - frac) +
                      sorted[static_cast<std::size_t>(hi)] * frac);
    }
}

}  // namespace

StatFeatures statnn_features(const CheckpointModel& model) {
    model.validate();
    StatFeatures f;
    for (const LayerRecord& layer : model.layers) {
        stream_stats(layer.weights, f.values);
        ++f.stream_count;
        if (layer.bias) {
            stream_stats(*layer.bias, f.values);
            ++f.stream_count;
        }
    }
    return f;
}

FlatFeatures mlp_flatten_features(const CheckpointModel& model) {
    model.validate();
    FlatFeatures f;
    f.values.reserve(static_cast<std::size_t>(model.parameter_count()));
    for (const LayerRecord& layer : model.layers) {
        f.values.insert(f.values.end(), layer.weights.begin(), layer.weights.end());
        if (layer.bias) f.values.insert(f.values.end(), layer.bias->begin(), layer.bias->end());
    }
    return f;
}

std::string arch_signature(const CheckpointModel& model) {
    model.validate();
    std::ostringstream os;
    for (const LayerRecord& layer : model.layers) {
        if (layer.layer_index) os << ';';
        os << layer_kind_name(layer.kind) << ':';
        for (std::size_t i = 0; i < layer.shape.size(); ++i) {
            if (i) os << 'x';
            os << layer.shape[i];
        }
        if (layer.bias) os << "+b";
    }
    return os.str();
}

const char* encoder_kind_name(EncoderKind kind) {
    switch (kind) {
        case EncoderKind::sne: return "sne";
        case EncoderKind::mlp: return "mlp";
        case EncoderKind::statnn: return "statnn";
    }
    throw ValidationError("unknown encoder kind tag");
}

EncoderKind encoder_kind_from_name(const std::string& name) {
    if (name == "sne") return EncoderKind::sne;
    if (name == "mlp") return EncoderKind::mlp;
    if (name == "statnn") return EncoderKind::statnn;
    throw ValidationError("unknown encoder '" + name + "' (expected sne, mlp, or statnn)");
}

BaselineParams BaselineParams::init(EncoderKind kind, const CheckpointModel& reference,
                                    i64 out_width, Rng& rng) {
    if (kind == EncoderKind::sne)
        throw ValidationError("baseline params cannot be built for the sne encoder");
    BaselineParams p;
    p.kind = kind;
    p.signature = arch_signature(reference);
    p.feature_dim = kind == EncoderKind::mlp
                        ? static_cast<i64>(mlp_flatten_features(reference).values.size())
                        : static_cast<i64>(statnn_features(reference).values.size());
    p.out_width = out_width;
    double lim = std::sqrt(6.0 / static_cast<double>(p.feature_dim + out_width));
    std::vector<double> w(static_cast<std::size_t>(out_width * p.feature_dim));
    for (double& v : w) v = rng.uniform(-lim, lim);
    p.lift_w = Tensor({out_width, p.feature_dim}, std::move(w), true);
    p.lift_b = Tensor::zeros({out_width}, true);
    return p;
}

std::vector<Tensor> BaselineParams::parameters() const { return {lift_w, lift_b}; }

std::vector<double> baseline_features(const BaselineParams& params, const CheckpointModel& model) {
    std::string sig = arch_signature(model);
    if (sig != params.signature)
        throw CapabilityError(std::string(encoder_kind_name(params.kind)) +
                              " encoder is locked to architecture [" + params.signature +
                              "] and cannot encode [" + sig + "]");
    std::vector<double> values = params.kind == EncoderKind::mlp
                                     ? mlp_flatten_features(model).values
                                     : statnn_features(model).values;
    if (static_cast<i64>(values.size()) != params.feature_dim)
        throw CapabilityError("feature length " + std::to_string(values.size()) +
                              " does not match the trained head input " +
                              std::to_string(params.feature_dim));
    return values;
}

Tensor baseline_encode_batch(const BaselineParams& params,
                             const std::vector<std::vector<double>>& features) {
    i64 n = static_cast<i64>(features.size());
    if (n < 1) throw ValidationError("baseline encode: empty batch");
    std::vector<double> data;
    data.reserve(static_cast<std::size_t>(n * params.feature_dim));
    for (const std::vector<double>& f : features) {
        if (static_cast<i64>(f.size()) != params.feature_dim)
            throw CapabilityError("feature length " + std::to_string(f.size()) +
                                  " does not match the trained head input " +
                                  std::to_string(params.feature_dim));
        data.insert(data.end(), f.begin(), f.end());
    }
    Tensor x({n, params.feature_dim}, std::move(data), false);
    return relu(linear(x, params.lift_w, &params.lift_b));
}

}  // namespace sne
