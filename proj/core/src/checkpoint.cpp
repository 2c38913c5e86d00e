#include "sne/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include <nlohmann/json.hpp>

#include "sne/common.hpp"

namespace sne {

namespace {

using i64 = std::int64_t;

constexpr char kMagic[8] = {'S', 'N', 'E', 'C', 'K', 'P', 'T', '\0'};
constexpr std::uint32_t kVersion = 1;

}  // namespace

const char* layer_kind_name(LayerKind kind) {
    switch (kind) {
        case LayerKind::linear: return "linear";
        case LayerKind::conv2d: return "conv2d";
    }
    throw ValidationError("unknown layer kind tag " +
                          std::to_string(static_cast<int>(kind)));
}

LayerKind layer_kind_from_name(const std::string& name) {
    if (name == "linear") return LayerKind::linear;
    if (name == "conv2d") return LayerKind::conv2d;
    throw ValidationError("unknown layer kind '" + name + "'");
}

const char* stream_tag_name(StreamTag tag) {
    return tag == StreamTag::weights ? "weights" : "bias";
}

i64 LayerRecord::weight_count() const {
    i64 n = 1;
    for (i64 d : shape) n *= d;
    return shape.empty() ? 0 : n;
}

void LayerRecord::validate() const {
    if (kind == LayerKind::linear) {
        if (shape.size() != 2)
            throw ValidationError("layer " + std::to_string(layer_index) +
                                  ": linear weights must be rank 2");
    } else if (kind == LayerKind::conv2d) {
        if (shape.size() != 4)
            throw ValidationError("layer " + std::to_string(layer_index) +
                                  ": conv2d weights must be rank 4");
    } else {
        throw ValidationError("layer " + std::to_string(layer_index) + ": unknown kind");
    }
    for (i64 d : shape)
        if (d < 1)
            throw ValidationError("layer " + std::to_string(layer_index) +
                                  ": non-positive dimension");
    if (static_cast<i64>(weights.size()) != weight_count())
        throw ValidationError("layer " + std::to_string(layer_index) + ": " +
                              std::to_string(weights.size()) + " weight values for a shape of " +
                              std::to_string(weight_count()));
    if (bias && static_cast<i64>(bias->size()) != out_dim())
        throw ValidationError("layer " + std::to_string(layer_index) + ": bias length " +
                              std::to_string(bias->size()) + " vs out dim " +
                              std::to_string(out_dim()));
}

void CheckpointModel::validate() const {
    if (layers.empty()) throw ValidationError("checkpoint has no layers");
    for (std::size_t i = 0; i < layers.size(); ++i) {
        if (layers[i].layer_index != static_cast<i64>(i))
            throw ValidationError("layer indices not contiguous from 0 (layer " +
                                  std::to_string(i) + " claims index " +
                                  std::to_string(layers[i].layer_index) + ")");
        layers[i].validate();
    }
    if (test_accuracy < 0.0 || test_accuracy > 1.0)
        throw ValidationError("test accuracy " + std::to_string(test_accuracy) +
                              " outside [0,1]");
}

i64 CheckpointModel::parameter_count() const {
    i64 n = 0;
    for (const LayerRecord& l : layers) {
        n += l.weight_count();
        if (l.bias) n += static_cast<i64>(l.bias->size());
    }
    return n;
}

std::vector<std::vector<double>> flatten(const LayerRecord& layer, StreamTag stream) {
    layer.validate();
    if (stream == StreamTag::bias) {
        if (!layer.bias) return {};  // absent stream, not an error
        return {*layer.bias};
    }
    if (layer.kind == LayerKind::linear) return {layer.weights};
    // conv2d: one k·k vector per (out, in) filter slice
    i64 out = layer.shape[0], in = layer.shape[1];
    i64 kk = layer.shape[2] * layer.shape[3];
    std::vector<std::vector<double>> vectors;
    vectors.reserve(static_cast<std::size_t>(out * in));
    for (i64 s = 0; s < out * in; ++s)
        vectors.emplace_back(layer.weights.begin() + s * kk, layer.weights.begin() + (s + 1) * kk);
    return vectors;
}

ChunkedLayer pad_chunk(const std::vector<std::vector<double>>& vectors, i64 c) {
    if (c < 1) throw ValidationError("chunksize must be >= 1, got " + std::to_string(c));
    ChunkedLayer out;
    out.chunksize = c;
    for (const std::vector<double>& vec : vectors) {
        if (vec.empty()) throw ValidationError("cannot chunk an empty vector");
        i64 len = static_cast<i64>(vec.size());
        i64 q = (len + c - 1) / c;
        out.group_sizes.push_back(q);
        for (i64 t = 0; t < q; ++t) {
            std::vector<double> chunk(static_cast<std::size_t>(c), 0.0);
            std::vector<double> mask(static_cast<std::size_t>(c), 0.0);
            for (i64 j = 0; j < c; ++j) {
                i64 src = t * c + j;
                if (src < len) {
                    chunk[static_cast<std::size_t>(j)] = vec[static_cast<std::size_t>(src)];
                    mask[static_cast<std::size_t>(j)] = 1.0;
                }
            }
            out.chunks.push_back(std::move(chunk));
            out.masks.push_back(std::move(mask));
        }
    }
    return out;
}

ChunkedLayer chunk_layer(const LayerRecord& layer, StreamTag stream, i64 c) {
    ChunkedLayer out = pad_chunk(flatten(layer, stream), c);
    out.kind = layer.kind;
    out.layer_index = layer.layer_index;
    out.stream = stream;
    return out;
}

std::vector<std::vector<double>> unpad(const ChunkedLayer& chunked) {
    std::vector<std::vector<double>> out;
    std::size_t at = 0;
    for (i64 q : chunked.group_sizes) {
        std::vector<double> vec;
        for (i64 t = 0; t < q; ++t, ++at) {
            if (at >= chunked.chunks.size())
                throw ValidationError("chunk group sizes exceed stored chunks");
            const std::vector<double>& chunk = chunked.chunks[at];
            const std::vector<double>& mask = chunked.masks[at];
            for (std::size_t j = 0; j < chunk.size(); ++j)
                if (mask[j] != 0.0) vec.push_back(chunk[j]);
        }
        out.push_back(std::move(vec));
    }
    if (at != chunked.chunks.size())
        throw ValidationError("chunk group sizes do not cover all stored chunks");
    return out;
}

namespace {

struct ByteWriter {
    std::vector<std::uint8_t> bytes;

    void raw(const void* p, std::size_t n) {
        const std::uint8_t* b = static_cast<const std::uint8_t*>(p);
        bytes.insert(bytes.end(), b, b + n);
    }
    void u8(std::uint8_t v) { bytes.push_back(v); }
    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) bytes.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void f32(float v) {
        std::uint32_t bits;
        std::memcpy(&bits, &v, 4);
        u32(bits);
    }
    void str(const std::string& s) {
        u32(static_cast<std::uint32_t>(s.size()));
        raw(s.data(), s.size());
    }
};

struct ByteReader {
    const std::vector<std::uint8_t>& bytes;
    std::size_t at = 0;
    std::string context = "header";

    explicit ByteReader(const std::vector<std::uint8_t>& b) : bytes(b) {}

    void need(std::size_t n) {
        if (at + n > bytes.size())
            throw IoError("truncated checkpoint while reading " + context + " (offset " +
                          std::to_string(at) + ")");
    }
    std::uint8_t u8() {
        need(1);
        return bytes[at++];
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes[at + static_cast<std::size_t>(i)]) << (8 * i);
        at += 4;
        return v;
    }
    float f32() {
        std::uint32_t bits = u32();
        float v;
        std::memcpy(&v, &bits, 4);
        return v;
    }
    std::string str() {
        std::uint32_t n = u32();
        need(n);
        std::string s(reinterpret_cast<const char*>(bytes.data() + at), n);
        at += n;
        return s;
    }
};

}  // namespace

std::vector<std::uint8_t> write_checkpoint(const CheckpointModel& model) {
    model.validate();
    ByteWriter w;
    w.raw(kMagic, sizeof(kMagic));
    w.u32(kVersion);
    w.u32(static_cast<std::uint32_t>(model.layers.size()));
    for (const LayerRecord& layer : model.layers) {
        w.u8(static_cast<std::uint8_t>(layer.kind));
        w.u8(static_cast<std::uint8_t>(layer.shape.size()));
        for (i64 d : layer.shape) w.u32(static_cast<std::uint32_t>(d));
        for (double v : layer.weights) w.f32(static_cast<float>(v));
        w.u8(layer.bias ? 1 : 0);
        if (layer.bias)
            for (double v : *layer.bias) w.f32(static_cast<float>(v));
    }
    std::map<std::string, std::string> meta;
    meta["arch"] = model.arch_id;
    meta["dataset"] = model.dataset_id;
    meta["test_accuracy"] = format_double(model.test_accuracy);
    for (const auto& [k, v] : model.hyperparameters) meta["hp." + k] = v;
    w.u32(static_cast<std::uint32_t>(meta.size()));
    for (const auto& [k, v] : meta) {
        w.str(k);
        w.str(v);
    }
    return w.bytes;
}

CheckpointModel read_checkpoint(const std::vector<std::uint8_t>& bytes) {
    ByteReader r(bytes);
    r.need(sizeof(kMagic));
    if (std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0)
        throw IoError("not a checkpoint file (bad magic)");
    r.at = sizeof(kMagic);
    std::uint32_t version = r.u32();
    if (version != kVersion)
        throw IoError("unsupported checkpoint version " + std::to_string(version) +
                      " (expected " + std::to_string(kVersion) + ")");
    std::uint32_t layer_count = r.u32();
    CheckpointModel model;
    for (std::uint32_t li = 0; li < layer_count; ++li) {
        r.context = "layer " + std::to_string(li);
        LayerRecord layer;
        layer.layer_index = static_cast<i64>(li);
        std::uint8_t kind = r.u8();
        if (kind > 1) throw IoError("layer " + std::to_string(li) + ": unknown kind tag " +
                                    std::to_string(kind));
        layer.kind = static_cast<LayerKind>(kind);
        std::uint8_t rank = r.u8();
        for (std::uint8_t d = 0; d < rank; ++d) layer.shape.push_back(static_cast<i64>(r.u32()));
        i64 count = layer.weight_count();
        if (count < 1 || count > (1 << 28))
            throw IoError("layer " + std::to_string(li) + ": implausible weight count " +
                          std::to_string(count));
        layer.weights.reserve(static_cast<std::size_t>(count));
        for (i64 i = 0; i < count; ++i) layer.weights.push_back(static_cast<double>(r.f32()));
        if (r.u8()) {
            std::vector<double> bias;
            bias.reserve(static_cast<std::size_t>(layer.out_dim()));
            for (i64 i = 0; i < layer.out_dim(); ++i) bias.push_back(static_cast<double>(r.f32()));
            layer.bias = std::move(bias);
        }
        try {
            layer.validate();
        } catch (const ValidationError& e) {
            throw IoError(std::string("layer ") + std::to_string(li) + ": " + e.what());
        }
        model.layers.push_back(std::move(layer));
    }
    r.context = "metadata";
    std::uint32_t meta_count = r.u32();
    std::map<std::string, std::string> meta;
    for (std::uint32_t i = 0; i < meta_count; ++i) {
        std::string k = r.str();
        meta[k] = r.str();
    }
    if (r.at != bytes.size())
        throw IoError("trailing bytes after checkpoint payload (offset " + std::to_string(r.at) +
                      ")");
    if (auto it = meta.find("arch"); it != meta.end()) model.arch_id = it->second;
    if (auto it = meta.find("dataset"); it != meta.end()) model.dataset_id = it->second;
    if (auto it = meta.find("test_accuracy"); it != meta.end())
        model.test_accuracy = std::stod(it->second);
    for (const auto& [k, v] : meta)
        if (k.rfind("hp.", 0) == 0) model.hyperparameters[k.substr(3)] = v;
    model.validate();
    return model;
}

void save_checkpoint(const CheckpointModel& model, const std::string& path) {
    std::vector<std::uint8_t> bytes = write_checkpoint(model);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("short write to '" + path + "'");
}

CheckpointModel load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary | std::ios::ate);
    if (!in) throw IoError("cannot open checkpoint '" + path + "'");
    std::streamsize size = in.tellg();
    in.seekg(0);
    std::vector<std::uint8_t> bytes(static_cast<std::size_t>(size));
    if (!in.read(reinterpret_cast<char*>(bytes.data()), size))
        throw IoError("short read from '" + path + "'");
    return read_checkpoint(bytes);
}

std::string checkpoint_to_json(const CheckpointModel& model) {
    nlohmann::ordered_json j;
    j["version"] = kVersion;
    j["arch_id"] = model.arch_id;
    j["dataset_id"] = model.dataset_id;
    j["test_accuracy"] = model.test_accuracy;
    j["hyperparameters"] = model.hyperparameters;
    j["layers"] = nlohmann::ordered_json::array();
    for (const LayerRecord& layer : model.layers) {
        nlohmann::ordered_json lj;
        lj["index"] = layer.layer_index;
        lj["kind"] = layer_kind_name(layer.kind);
        lj["shape"] = layer.shape;
        lj["weights"] = layer.weights;
        if (layer.bias) lj["bias"] = *layer.bias;
        j["layers"].push_back(std::move(lj));
    }
    return j.dump(2);
}

}  // namespace sne
