#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "deepls/error.hpp"
#include "deepls/rng.hpp"

namespace deepls {

/// A batch of points, one point per column.
using Points = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// ReLU³ activation, max(x³, 0).
constexpr double relu3(double x) noexcept { return x > 0.0 ? x * x * x : 0.0; }

/// Derivative of relu3: 3x² for x > 0 and 0 otherwise (including x = 0).
constexpr double relu3_derivative(double x) noexcept { return x > 0.0 ? 3.0 * x * x : 0.0; }

struct Architecture {
    int depth = 3;   // number of hidden (activated) layers L
    int width = 100; // m
    int input_dim = 1;

    friend bool operator==(const Architecture&, const Architecture&) = default;
};

/// Dense feed-forward network φ(x;θ) = h_L ∘ ... ∘ h_0(x) with
/// h_l(y) = relu3(W^l y + b^l) for l < L and the output layer
/// h_L(y) = W^L (y + b^L), b^L a scalar broadcast over the m inputs.
///
/// Parameters live in one flat vector, layer-major, weights before biases,
/// matrices row-major:
///   [W^0 (m×d), b^0 (m), W^1 (m×m), b^1 (m), ..., W^L (1×m), b^L (1)]
/// This ordering is also the on-disk checkpoint order.
class SolutionNetwork {
public:
    using RowMajorMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    using MatrixView = Eigen::Map<RowMajorMatrix>;
    using ConstMatrixView = Eigen::Map<const RowMajorMatrix>;
    using VectorView = Eigen::Map<Vector>;
    using ConstVectorView = Eigen::Map<const Vector>;

    /// Zero-initialized network.
    explicit SolutionNetwork(Architecture arch) : arch_(arch)
    {
        if (arch.depth < 1 || arch.width < 1 || arch.input_dim < 1)
            fail(ErrorKind::config, "network depth, width and input_dim must be positive");
        std::size_t offset = 0;
        for (int l = 0; l <= arch_.depth; ++l) {
            const int rows = l < arch_.depth ? arch_.width : 1;
            const int cols = l == 0 ? arch_.input_dim : arch_.width;
            layers_.push_back({rows, cols, offset, offset + std::size_t(rows) * cols});
            offset += std::size_t(rows) * cols + std::size_t(rows);
        }
        // the output bias is a single scalar, not one per output row
        params_ = Vector::Zero(static_cast<Eigen::Index>(offset));
    }

    /// Glorot-uniform weights in ±sqrt(6/(fan_in+fan_out)), zero biases.
    static SolutionNetwork initialized(Architecture arch, Rng& rng)
    {
        SolutionNetwork net(arch);
        for (int l = 0; l <= arch.depth; ++l) {
            const auto& layer = net.layers_[l];
            const double limit = std::sqrt(6.0 / double(layer.rows + layer.cols));
            auto w = net.weight(l);
            for (int r = 0; r < layer.rows; ++r)
                for (int c = 0; c < layer.cols; ++c)
                    w(r, c) = rng.uniform(-limit, limit);
        }
        return net;
    }

    const Architecture& architecture() const noexcept { return arch_; }
    int input_dim() const noexcept { return arch_.input_dim; }
    std::size_t parameter_count() const noexcept { return std::size_t(params_.size()); }

    Vector& parameters() noexcept { return params_; }
    const Vector& parameters() const noexcept { return params_; }

    void set_parameters(const Vector& theta)
    {
        require(theta.size() == params_.size(), "parameter vector length mismatch");
        params_ = theta;
    }

    MatrixView weight(int l)
    {
        const auto& s = layers_.at(l);
        return {params_.data() + s.weight_offset, s.rows, s.cols};
    }
    ConstMatrixView weight(int l) const
    {
        const auto& s = layers_.at(l);
        return {params_.data() + s.weight_offset, s.rows, s.cols};
    }
    /// Hidden-layer bias b^l, l < L.
    VectorView bias(int l)
    {
        const auto& s = layers_.at(l);
        return {params_.data() + s.bias_offset, s.rows};
    }
    ConstVectorView bias(int l) const
    {
        const auto& s = layers_.at(l);
        return {params_.data() + s.bias_offset, s.rows};
    }
    double& output_bias() noexcept { return params_[params_.size() - 1]; }
    double output_bias() const noexcept { return params_[params_.size() - 1]; }

    bool all_finite() const noexcept { return params_.allFinite(); }

    /// Evaluate a single point.
    double operator()(const Eigen::Ref<const Vector>& x) const
    {
        require(x.size() == arch_.input_dim, "point dimension does not match network input_dim");
        Vector y = x;
        for (int l = 0; l < arch_.depth; ++l) {
            Vector z = weight(l) * y + bias(l);
            y = z.unaryExpr([](double v) { return relu3(v); });
        }
        return output_row().dot(y) + output_bias() * output_row().sum();
    }

    /// Activations retained by a batched forward pass for reverse mode.
    struct Cache {
        std::vector<Eigen::MatrixXd> pre;  // W^l y + b^l per hidden layer
        std::vector<Eigen::MatrixXd> post; // relu3 of the above
    };

    /// Batched forward; one output per column of `x`.
    Vector forward(const Points& x, Cache* cache = nullptr) const
    {
        require(x.rows() == arch_.input_dim, "point dimension does not match network input_dim");
        Cache local;
        Cache& c = cache ? *cache : local;
        c.pre.resize(arch_.depth);
        c.post.resize(arch_.depth);
        for (int l = 0; l < arch_.depth; ++l) {
            const Eigen::MatrixXd& input = l == 0 ? x : c.post[l - 1];
            c.pre[l].noalias() = weight(l) * input;
            c.pre[l].colwise() += bias(l);
            c.post[l] = c.pre[l].unaryExpr([](double v) { return relu3(v); });
        }
        const Eigen::MatrixXd& last = c.post.back();
        Vector out = (output_row() * last).transpose();
        out.array() += output_bias() * output_row().sum();
        return out;
    }

    /// Gradient of Σ_i c_i φ(x_i;θ) with respect to θ in flat parameter order.
    Vector backprop(const Points& x, const Vector& cotangents) const
    {
        require(cotangents.size() == x.cols(), "one cotangent per point is required");
        Cache cache;
        forward(x, &cache);
        Vector grad = Vector::Zero(params_.size());
        accumulate_gradient(x, cache, cotangents, grad);
        return grad;
    }

    /// Adds ∂(Σ c_i φ(x_i))/∂θ to `grad` using activations from `forward(x, &cache)`.
    void accumulate_gradient(const Points& x, const Cache& cache, const Vector& cotangents,
                             Vector& grad) const
    {
        require(cotangents.size() == x.cols(), "one cotangent per point is required");
        require(grad.size() == params_.size(), "gradient buffer length mismatch");
        const int depth = arch_.depth;
        const auto& out = layers_[depth];
        const auto row = output_row();
        const double csum = cotangents.sum();

        // output layer: φ = W^L y + b^L Σ W^L
        {
            Eigen::Map<Vector> gw(grad.data() + out.weight_offset, arch_.width);
            gw.noalias() += cache.post[depth - 1] * cotangents;
            gw.array() += output_bias() * csum;
            grad[grad.size() - 1] += csum * row.sum();
        }

        Eigen::MatrixXd delta = row.transpose() * cotangents.transpose(); // ∂/∂post[depth-1]
        for (int l = depth - 1; l >= 0; --l) {
            delta.array() *= cache.pre[l].unaryExpr([](double v) { return relu3_derivative(v); }).array();
            const Eigen::MatrixXd& input = l == 0 ? x : cache.post[l - 1];
            const auto& s = layers_[l];
            Eigen::Map<RowMajorMatrix> gw(grad.data() + s.weight_offset, s.rows, s.cols);
            gw.noalias() += delta * input.transpose();
            Eigen::Map<Vector>(grad.data() + s.bias_offset, s.rows).noalias() += delta.rowwise().sum();
            if (l > 0)
                delta = weight(l).transpose() * delta;
        }
    }

    friend bool operator==(const SolutionNetwork& a, const SolutionNetwork& b)
    {
        return a.arch_ == b.arch_ && a.params_ == b.params_;
    }

private:
    struct LayerSlice {
        int rows;
        int cols;
        std::size_t weight_offset;
        std::size_t bias_offset;
    };

    Eigen::Map<const Eigen::RowVectorXd> output_row() const
    {
        return {params_.data() + layers_[arch_.depth].weight_offset, arch_.width};
    }

    Architecture arch_;
    std::vector<LayerSlice> layers_;
    Vector params_;
};

} // namespace deepls
