#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "mmcf/tensor.hpp"

namespace mmcf {

enum class LayerKind { Dense, Conv2d, MaxPool2d, Relu, Sigmoid, Flatten, Concat };

std::string to_string(LayerKind kind);

/// Thrown when layer shapes do not line up. The message always names the
/// global index of the offending layer.
class ShapeError : public std::invalid_argument {
public:
    ShapeError(std::size_t layer_index, const std::string& what);
    std::size_t layer_index() const { return layer_index_; }

private:
    std::size_t layer_index_;
};

struct LayerSpec {
    LayerKind kind = LayerKind::Relu;

    // dense
    std::size_t in_width = 0;
    std::size_t out_width = 0;

    // conv2d
    std::size_t in_channels = 0;
    std::size_t out_channels = 0;
    std::size_t kernel_h = 0;
    std::size_t kernel_w = 0;
    std::size_t padding = 0;  // zero border on each side; 0 is "valid"

    // conv2d and maxpool2d
    std::size_t stride = 1;
    std::size_t window = 0;  // maxpool2d only

    static LayerSpec dense(std::size_t in, std::size_t out);
    static LayerSpec conv2d(std::size_t in_channels, std::size_t out_channels, std::size_t kernel,
                            std::size_t stride = 1, std::size_t padding = 0);
    static LayerSpec maxpool2d(std::size_t window, std::size_t stride);
    static LayerSpec relu();
    static LayerSpec sigmoid();
    static LayerSpec flatten();
    static LayerSpec concat();

    bool parameterized() const { return kind == LayerKind::Dense || kind == LayerKind::Conv2d; }
    /// Weight and bias shapes; empty for parameter-free layers.
    std::vector<Shape> parameter_shapes() const;

    bool operator==(const LayerSpec&) const = default;
};

/// A feed-forward network of one or two input branches. With two branches,
/// the first trunk layer must be a concat joining the flattened branch
/// outputs (branch 0 first). With one branch the trunk may be empty.
///
/// Layers are addressed by a global index: branch 0, then branch 1, then the
/// trunk.
struct NetworkSpec {
    std::vector<Shape> input_shapes;
    std::vector<std::vector<LayerSpec>> branches;
    std::vector<LayerSpec> trunk;
    std::size_t output_width = 7;

    std::size_t layer_count() const;
    const LayerSpec& layer(std::size_t global_index) const;

    bool operator==(const NetworkSpec&) const = default;
};

/// Per-sample output shape of every layer in global order. Throws ShapeError
/// naming the first incompatible layer, or when the network does not end in a
/// sigmoid over exactly output_width units.
std::vector<Shape> infer_shapes(const NetworkSpec& spec);

inline void validate(const NetworkSpec& spec) { (void)infer_shapes(spec); }

/// Shapes of all parameter tensors (weight, bias per parameterized layer) in
/// global layer order.
std::vector<Shape> parameter_shapes(const NetworkSpec& spec);

}  // namespace mmcf
