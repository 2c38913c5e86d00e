#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace sne {

enum class LayerKind : std::uint8_t { linear = 0, conv2d = 1 };

const char* layer_kind_name(LayerKind kind);
LayerKind layer_kind_from_name(const std::string& name);

// One parameterized layer of a stored network. Linear weights are [out×in],
// conv2d weights [out×in×kh×kw], both row-major.
struct LayerRecord {
    LayerKind kind = LayerKind::linear;
    std::vector<std::int64_t> shape;
    std::vector<double> weights;
    std::optional<std::vector<double>> bias;  // length out
    std::int64_t layer_index = 0;             // 0-based depth, the "level"

    std::int64_t out_dim() const { return shape.empty() ? 0 : shape.front(); }
    std::int64_t weight_count() const;
    void validate() const;
};

// A network-as-data record: ordered layers plus provenance and its label.
struct CheckpointModel {
    std::vector<LayerRecord> layers;
    std::string arch_id;
    std::string dataset_id;
    double test_accuracy = 0.0;  // y ∈ [0,1]
    std::map<std::string, std::string> hyperparameters;

    void validate() const;
    std::int64_t parameter_count() const;  // weights + biases over all layers
};

enum class StreamTag : std::uint8_t { weights = 0, bias = 1 };

const char* stream_tag_name(StreamTag tag);

// Fixed-width chunks of one parameter stream with padding masks. group_sizes
// records how many chunks each flattened source vector produced, which makes
// the round trip lossless.
struct ChunkedLayer {
    std::vector<std::vector<double>> chunks;  // each exactly length c
    std::vector<std::vector<double>> masks;   // 1 = real weight, 0 = pad
    std::vector<std::int64_t> group_sizes;
    LayerKind kind = LayerKind::linear;
    std::int64_t layer_index = 0;
    StreamTag stream = StreamTag::weights;
    std::int64_t chunksize = 0;
};

// Flattening rules: linear weights collapse to one out·in vector; conv2d
// weights keep one k·k vector per (out, in) filter slice; bias is one vector.
std::vector<std::vector<double>> flatten(const LayerRecord& layer, StreamTag stream);

// Zero-pads each vector to a multiple of c and splits it into length-c chunks.
ChunkedLayer pad_chunk(const std::vector<std::vector<double>>& vectors, std::int64_t c);

// flatten + pad_chunk with provenance filled in.
ChunkedLayer chunk_layer(const LayerRecord& layer, StreamTag stream, std::int64_t c);

// Mask-guided inverse of pad_chunk.
std::vector<std::vector<double>> unpad(const ChunkedLayer& chunked);

// Binary wire format (little-endian, float32 payloads, versioned). Decode
// failures raise IoError naming the offending layer.
std::vector<std::uint8_t> write_checkpoint(const CheckpointModel& model);
CheckpointModel read_checkpoint(const std::vector<std::uint8_t>& bytes);

void save_checkpoint(const CheckpointModel& model, const std::string& path);
CheckpointModel load_checkpoint(const std::string& path);

// Debug export (schema documented in the README).
std::string checkpoint_to_json(const CheckpointModel& model);

}  // namespace sne
