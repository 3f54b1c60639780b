#include "mmcf/layers.hpp"

namespace mmcf {

std::string to_string(LayerKind kind) {
    switch (kind) {
        case LayerKind::Dense: return "dense";
        case LayerKind::Conv2d: return "conv2d";
        case LayerKind::MaxPool2d: return "maxpool2d";
        case LayerKind::Relu: return "relu";
        case LayerKind::Sigmoid: return "sigmoid";
        case LayerKind::Flatten: return "flatten";
        case LayerKind::Concat: return "concat";
    }
    return "unknown";
}

ShapeError::ShapeError(std::size_t layer_index, const std::string& what)
    : std::invalid_argument("layer " + std::to_string(layer_index) + ": " + what),
      layer_index_(layer_index) {}

LayerSpec LayerSpec::dense(std::size_t in, std::size_t out) {
    LayerSpec s;
    s.kind = LayerKind::Dense;
    s.in_width = in;
    s.out_width = out;
    return s;
}

LayerSpec LayerSpec::conv2d(std::size_t in_channels, std::size_t out_channels, std::size_t kernel,
                            std::size_t stride, std::size_t padding) {
    LayerSpec s;
    s.kind = LayerKind::Conv2d;
    s.in_channels = in_channels;
    s.out_channels = out_channels;
    s.kernel_h = kernel;
    s.kernel_w = kernel;
    s.stride = stride;
    s.padding = padding;
    return s;
}

LayerSpec LayerSpec::maxpool2d(std::size_t window, std::size_t stride) {
    LayerSpec s;
    s.kind = LayerKind::MaxPool2d;
    s.window = window;
    s.stride = stride;
    return s;
}

LayerSpec LayerSpec::relu() { return LayerSpec{.kind = LayerKind::Relu}; }
LayerSpec LayerSpec::sigmoid() { return LayerSpec{.kind = LayerKind::Sigmoid}; }
LayerSpec LayerSpec::flatten() { return LayerSpec{.kind = LayerKind::Flatten}; }
LayerSpec LayerSpec::concat() { return LayerSpec{.kind = LayerKind::Concat}; }

std::vector<Shape> LayerSpec::parameter_shapes() const {
    switch (kind) {
        case LayerKind::Dense: return {{out_width, in_width}, {out_width}};
        case LayerKind::Conv2d:
            return {{out_channels, in_channels, kernel_h, kernel_w}, {out_channels}};
        default: return {};
    }
}

std::size_t NetworkSpec::layer_count() const {
    std::size_t n = trunk.size();
    for (const auto& b : branches) n += b.size();
    return n;
}

const LayerSpec& NetworkSpec::layer(std::size_t global_index) const {
    std::size_t i = global_index;
    for (const auto& b : branches) {
        if (i < b.size()) return b[i];
        i -= b.size();
    }
    return trunk.at(i);
}

namespace {

Shape layer_output_shape(const LayerSpec& layer, std::size_t index, const Shape& in) {
    auto fail = [&](const std::string& msg) -> ShapeError {
        return ShapeError(index, to_string(layer.kind) + " " + msg + ", got input " +
                                     shape_to_string(in));
    };
    switch (layer.kind) {
        case LayerKind::Dense:
            if (layer.in_width == 0 || layer.out_width == 0) throw fail("has a zero width");
            if (in.size() != 1 || in[0] != layer.in_width) {
                throw fail("expects input (" + std::to_string(layer.in_width) + ")");
            }
            return {layer.out_width};
        case LayerKind::Conv2d: {
            if (layer.in_channels == 0 || layer.out_channels == 0 || layer.kernel_h == 0 ||
                layer.kernel_w == 0 || layer.stride == 0) {
                throw fail("has a zero dimension");
            }
            if (in.size() != 3 || in[0] != layer.in_channels) {
                throw fail("expects " + std::to_string(layer.in_channels) + " channels (C,H,W)");
            }
            const std::size_t h = in[1] + 2 * layer.padding;
            const std::size_t w = in[2] + 2 * layer.padding;
            if (h < layer.kernel_h || w < layer.kernel_w) throw fail("kernel larger than input");
            return {layer.out_channels, (h - layer.kernel_h) / layer.stride + 1,
                    (w - layer.kernel_w) / layer.stride + 1};
        }
        case LayerKind::MaxPool2d:
            if (layer.window == 0 || layer.stride == 0) throw fail("has a zero window or stride");
            if (in.size() != 3) throw fail("expects (C,H,W)");
            if (in[1] < layer.window || in[2] < layer.window) throw fail("window larger than input");
            return {in[0], (in[1] - layer.window) / layer.stride + 1,
                    (in[2] - layer.window) / layer.stride + 1};
        case LayerKind::Relu:
        case LayerKind::Sigmoid: return in;
        case LayerKind::Flatten: return {shape_size(in)};
        case LayerKind::Concat: throw fail("may only appear as the first trunk layer");
    }
    throw fail("unknown kind");
}

}  // namespace

std::vector<Shape> infer_shapes(const NetworkSpec& spec) {
    if (spec.branches.empty() || spec.branches.size() > 2) {
        throw ShapeError(0, "network needs one or two input branches");
    }
    if (spec.input_shapes.size() != spec.branches.size()) {
        throw ShapeError(0, "input shape count does not match branch count");
    }
    std::vector<Shape> shapes;
    shapes.reserve(spec.layer_count());
    std::size_t index = 0;
    std::vector<Shape> branch_out;
    for (std::size_t b = 0; b < spec.branches.size(); ++b) {
        Shape cur = spec.input_shapes[b];
        for (std::size_t d : cur) {
            if (d == 0) throw ShapeError(index, "input shape has a zero dimension");
        }
        for (const auto& layer : spec.branches[b]) {
            cur = layer_output_shape(layer, index, cur);
            shapes.push_back(cur);
            ++index;
        }
        branch_out.push_back(cur);
    }
    Shape cur = branch_out[0];
    for (std::size_t t = 0; t < spec.trunk.size(); ++t) {
        const auto& layer = spec.trunk[t];
        if (layer.kind == LayerKind::Concat) {
            if (t != 0 || spec.branches.size() != 2) {
                throw ShapeError(index, "concat must be the first trunk layer of a two-branch network");
            }
            if (branch_out[0].size() != 1 || branch_out[1].size() != 1) {
                throw ShapeError(index, "concat inputs must be flat, got " +
                                            shape_to_string(branch_out[0]) + " and " +
                                            shape_to_string(branch_out[1]));
            }
            cur = {branch_out[0][0] + branch_out[1][0]};
        } else {
            if (t == 0 && spec.branches.size() == 2) {
                throw ShapeError(index, "two-branch network must start its trunk with concat");
            }
            cur = layer_output_shape(layer, index, cur);
        }
        shapes.push_back(cur);
        ++index;
    }
    if (spec.branches.size() == 2 && spec.trunk.empty()) {
        throw ShapeError(index, "two-branch network has no trunk");
    }
    if (shapes.empty()) throw ShapeError(0, "network has no layers");
    const std::size_t last = shapes.size() - 1;
    if (spec.layer(last).kind != LayerKind::Sigmoid) {
        throw ShapeError(last, "final layer must be sigmoid");
    }
    if (shapes.back() != Shape{spec.output_width}) {
        throw ShapeError(last, "output shape " + shape_to_string(shapes.back()) +
                                   " does not match output width " +
                                   std::to_string(spec.output_width));
    }
    return shapes;
}

std::vector<Shape> parameter_shapes(const NetworkSpec& spec) {
    std::vector<Shape> out;
    for (std::size_t i = 0; i < spec.layer_count(); ++i) {
        for (auto& s : spec.layer(i).parameter_shapes()) out.push_back(std::move(s));
    }
    return out;
}

}  // namespace mmcf
