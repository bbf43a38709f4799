#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "vscnn/rng.hpp"

namespace vscnn::nn {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMat>;
using ConstMapMat = Eigen::Map<const RowMat>;
using MapVec = Eigen::Map<Eigen::VectorXd>;
using ConstMapVec = Eigen::Map<const Eigen::VectorXd>;

/// Dense (channels, height, width) tensor, row-major.
struct Tensor {
    int c = 0, h = 0, w = 0;
    std::vector<double> v;

    Tensor() = default;
    Tensor(int c_, int h_, int w_) : c(c_), h(h_), w(w_), v(static_cast<std::size_t>(c_) * h_ * w_, 0.0) {}

    double& at(int ci, int hi, int wi) { return v[(static_cast<std::size_t>(ci) * h + hi) * w + wi]; }
    double at(int ci, int hi, int wi) const { return v[(static_cast<std::size_t>(ci) * h + hi) * w + wi]; }
    std::size_t size() const { return v.size(); }
    int spatial() const { return h * w; }
};

/// Named view over one parameter array and its gradient accumulator.
struct ParamBlock {
    std::string name;
    std::vector<double>* value = nullptr;
    std::vector<double>* grad = nullptr;
};

inline void zero_grads(std::vector<ParamBlock>& blocks) {
    for (auto& b : blocks) std::fill(b.grad->begin(), b.grad->end(), 0.0);
}

inline int conv_out_dim(int in, int stride) {
    // kernel 3, pad 1
    return (in - 1) / stride + 1;
}

/// 3x3 convolution, pad 1, configurable stride; im2col + GEMM.
class Conv2d {
public:
    Conv2d(int in_c, int out_c, int stride)
        : in_c_(in_c), out_c_(out_c), stride_(stride),
          w_(static_cast<std::size_t>(out_c) * in_c * 9, 0.0), b_(out_c, 0.0),
          dw_(w_.size(), 0.0), db_(b_.size(), 0.0) {}

    void init(Rng& rng) {
        const double a = std::sqrt(1.0 / (in_c_ * 9.0));
        for (auto& x : w_) x = rng.uniform(-a, a);
        std::fill(b_.begin(), b_.end(), 0.0);
    }

    Tensor forward(const Tensor& x) {
        if (x.c != in_c_) throw std::invalid_argument("Conv2d: channel mismatch");
        in_h_ = x.h;
        in_w_ = x.w;
        out_h_ = conv_out_dim(x.h, stride_);
        out_w_ = conv_out_dim(x.w, stride_);
        const int K = in_c_ * 9;
        const int N = out_h_ * out_w_;
        col_.assign(static_cast<std::size_t>(K) * N, 0.0);

        for (int ci = 0; ci < in_c_; ++ci) {
            for (int ky = 0; ky < 3; ++ky) {
                for (int kx = 0; kx < 3; ++kx) {
                    double* row = col_.data() + (static_cast<std::size_t>(ci) * 9 + ky * 3 + kx) * N;
                    for (int oy = 0; oy < out_h_; ++oy) {
                        const int iy = oy * stride_ + ky - 1;
                        if (iy < 0 || iy >= x.h) continue;
                        const double* src = &x.v[(static_cast<std::size_t>(ci) * x.h + iy) * x.w];
                        double* dst = row + static_cast<std::size_t>(oy) * out_w_;
                        for (int ox = 0; ox < out_w_; ++ox) {
                            const int ix = ox * stride_ + kx - 1;
                            if (ix >= 0 && ix < x.w) dst[ox] = src[ix];
                        }
                    }
                }
            }
        }

        Tensor y(out_c_, out_h_, out_w_);
        MapMat ym(y.v.data(), out_c_, N);
        ym.noalias() = ConstMapMat(w_.data(), out_c_, K) * ConstMapMat(col_.data(), K, N);
        for (int co = 0; co < out_c_; ++co) ym.row(co).array() += b_[co];
        return y;
    }

    /// Accumulates dw/db from the cached forward input; returns dx.
    Tensor backward(const Tensor& dy) {
        const int K = in_c_ * 9;
        const int N = out_h_ * out_w_;
        ConstMapMat dym(dy.v.data(), out_c_, N);

        MapMat(dw_.data(), out_c_, K).noalias() +=
            dym * ConstMapMat(col_.data(), K, N).transpose();
        MapVec(db_.data(), out_c_).noalias() += dym.rowwise().sum();

        dcol_.assign(static_cast<std::size_t>(K) * N, 0.0);
        MapMat(dcol_.data(), K, N).noalias() = ConstMapMat(w_.data(), out_c_, K).transpose() * dym;

        Tensor dx(in_c_, in_h_, in_w_);
        for (int ci = 0; ci < in_c_; ++ci) {
            for (int ky = 0; ky < 3; ++ky) {
                for (int kx = 0; kx < 3; ++kx) {
                    const double* row = dcol_.data() + (static_cast<std::size_t>(ci) * 9 + ky * 3 + kx) * N;
                    for (int oy = 0; oy < out_h_; ++oy) {
                        const int iy = oy * stride_ + ky - 1;
                        if (iy < 0 || iy >= in_h_) continue;
                        double* dst = &dx.v[(static_cast<std::size_t>(ci) * in_h_ + iy) * in_w_];
                        const double* src = row + static_cast<std::size_t>(oy) * out_w_;
                        for (int ox = 0; ox < out_w_; ++ox) {
                            const int ix = ox * stride_ + kx - 1;
                            if (ix >= 0 && ix < in_w_) dst[ix] += src[ox];
                        }
                    }
                }
            }
        }
        return dx;
    }

    void collect_params(const std::string& prefix, std::vector<ParamBlock>& out) {
        out.push_back({prefix + ".w", &w_, &dw_});
        out.push_back({prefix + ".b", &b_, &db_});
    }

    int out_channels() const { return out_c_; }

private:
    int in_c_, out_c_, stride_;
    int in_h_ = 0, in_w_ = 0, out_h_ = 0, out_w_ = 0;
    std::vector<double> w_, b_, dw_, db_;
    std::vector<double> col_, dcol_;
};

class Relu {
public:
    Tensor forward(const Tensor& x) {
        Tensor y = x;
        mask_.resize(y.size());
        for (std::size_t i = 0; i < y.v.size(); ++i) {
            mask_[i] = y.v[i] > 0.0;
            if (!mask_[i]) y.v[i] = 0.0;
        }
        return y;
    }

    Tensor backward(const Tensor& dy) {
        Tensor dx = dy;
        for (std::size_t i = 0; i < dx.v.size(); ++i)
            if (!mask_[i]) dx.v[i] = 0.0;
        return dx;
    }

private:
    std::vector<std::uint8_t> mask_;
};

/// 2x2 average pooling, stride 2; trailing odd rows/columns are dropped.
class AvgPool2 {
public:
    Tensor forward(const Tensor& x) {
        in_h_ = x.h;
        in_w_ = x.w;
        Tensor y(x.c, x.h / 2, x.w / 2);
        if (y.h == 0 || y.w == 0) throw std::invalid_argument("AvgPool2: input too small");
        for (int ci = 0; ci < x.c; ++ci)
            for (int oy = 0; oy < y.h; ++oy)
                for (int ox = 0; ox < y.w; ++ox)
                    y.at(ci, oy, ox) = 0.25 * (x.at(ci, 2 * oy, 2 * ox) + x.at(ci, 2 * oy, 2 * ox + 1) +
                                               x.at(ci, 2 * oy + 1, 2 * ox) + x.at(ci, 2 * oy + 1, 2 * ox + 1));
        return y;
    }

    Tensor backward(const Tensor& dy) {
        Tensor dx(dy.c, in_h_, in_w_);
        for (int ci = 0; ci < dy.c; ++ci)
            for (int oy = 0; oy < dy.h; ++oy)
                for (int ox = 0; ox < dy.w; ++ox) {
                    const double g = 0.25 * dy.at(ci, oy, ox);
                    dx.at(ci, 2 * oy, 2 * ox) = g;
                    dx.at(ci, 2 * oy, 2 * ox + 1) = g;
                    dx.at(ci, 2 * oy + 1, 2 * ox) = g;
                    dx.at(ci, 2 * oy + 1, 2 * ox + 1) = g;
                }
        return dx;
    }

private:
    int in_h_ = 0, in_w_ = 0;
};

class GlobalAvgPool {
public:
    std::vector<double> forward(const Tensor& x) {
        c_ = x.c;
        h_ = x.h;
        w_ = x.w;
        std::vector<double> y(x.c, 0.0);
        const double inv = 1.0 / x.spatial();
        for (int ci = 0; ci < x.c; ++ci) {
            double s = 0.0;
            const double* p = &x.v[static_cast<std::size_t>(ci) * x.spatial()];
            for (int i = 0; i < x.spatial(); ++i) s += p[i];
            y[ci] = s * inv;
        }
        return y;
    }

    Tensor backward(const std::vector<double>& dy) {
        Tensor dx(c_, h_, w_);
        const double inv = 1.0 / (h_ * w_);
        for (int ci = 0; ci < c_; ++ci) {
            const double g = dy[ci] * inv;
            double* p = &dx.v[static_cast<std::size_t>(ci) * dx.spatial()];
            for (int i = 0; i < dx.spatial(); ++i) p[i] = g;
        }
        return dx;
    }

private:
    int c_ = 0, h_ = 0, w_ = 0;
};

class Linear {
public:
    Linear(int in_dim, int out_dim)
        : in_dim_(in_dim), out_dim_(out_dim),
          w_(static_cast<std::size_t>(out_dim) * in_dim, 0.0), b_(out_dim, 0.0),
          dw_(w_.size(), 0.0), db_(b_.size(), 0.0) {}

    void init(Rng& rng) {
        const double a = std::sqrt(1.0 / in_dim_);
        for (auto& x : w_) x = rng.uniform(-a, a);
        std::fill(b_.begin(), b_.end(), 0.0);
    }

    std::vector<double> forward(const std::vector<double>& x) {
        if (static_cast<int>(x.size()) != in_dim_) throw std::invalid_argument("Linear: dim mismatch");
        x_ = x;
        std::vector<double> y(out_dim_);
        MapVec(y.data(), out_dim_).noalias() =
            ConstMapMat(w_.data(), out_dim_, in_dim_) * ConstMapVec(x.data(), in_dim_) +
            ConstMapVec(b_.data(), out_dim_);
        return y;
    }

    std::vector<double> backward(const std::vector<double>& dy) {
        MapMat(dw_.data(), out_dim_, in_dim_).noalias() +=
            ConstMapVec(dy.data(), out_dim_) * ConstMapVec(x_.data(), in_dim_).transpose();
        MapVec(db_.data(), out_dim_).noalias() += ConstMapVec(dy.data(), out_dim_);
        std::vector<double> dx(in_dim_);
        MapVec(dx.data(), in_dim_).noalias() =
            ConstMapMat(w_.data(), out_dim_, in_dim_).transpose() * ConstMapVec(dy.data(), out_dim_);
        return dx;
    }

    void collect_params(const std::string& prefix, std::vector<ParamBlock>& out) {
        out.push_back({prefix + ".w", &w_, &dw_});
        out.push_back({prefix + ".b", &b_, &db_});
    }

private:
    int in_dim_, out_dim_;
    std::vector<double> w_, b_, dw_, db_;
    std::vector<double> x_;
};

/// Numerically stable softmax (max subtraction).
inline std::vector<double> softmax(std::span<const double> logits) {
    std::vector<double> p(logits.begin(), logits.end());
    const double m = *std::max_element(p.begin(), p.end());
    double sum = 0.0;
    for (auto& x : p) {
        x = std::exp(x - m);
        sum += x;
    }
    for (auto& x : p) x /= sum;
    return p;
}

inline double log_sum_exp(std::span<const double> logits) {
    const double m = *std::max_element(logits.begin(), logits.end());
    double s = 0.0;
    for (double x : logits) s += std::exp(x - m);
    return m + std::log(s);
}

/// Cross entropy of softmax(logits) against a soft target, computed in logit
/// space: logsumexp(z) - sum_i y_i z_i. Exact for any finite logits.
inline double cross_entropy_logits(std::span<const double> logits, std::span<const double> target) {
    double dot = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) dot += target[i] * logits[i];
    return log_sum_exp(logits) - dot;
}

/// Gradient of cross_entropy_logits w.r.t. logits: softmax(z) - y.
inline std::vector<double> cross_entropy_logits_grad(std::span<const double> logits,
                                                     std::span<const double> target) {
    auto g = softmax(logits);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] -= target[i];
    return g;
}

/// Cross entropy against a probability vector: -sum_i y_i log p_i.
inline double cross_entropy(std::span<const double> probs, std::span<const double> target) {
    double loss = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        if (target[i] == 0.0) continue;
        loss -= target[i] * std::log(std::max(probs[i], 1e-300));
    }
    return loss;
}

/// Backprop a gradient w.r.t. softmax outputs to the pre-softmax logits:
/// dz = p .* (dp - <dp, p>).
inline std::vector<double> softmax_backward(std::span<const double> probs,
                                            std::span<const double> dprobs) {
    double dot = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) dot += dprobs[i] * probs[i];
    std::vector<double> dz(probs.size());
    for (std::size_t i = 0; i < probs.size(); ++i) dz[i] = probs[i] * (dprobs[i] - dot);
    return dz;
}

inline int argmax(std::span<const double> v) {
    return static_cast<int>(std::max_element(v.begin(), v.end()) - v.begin());
}

}  // namespace vscnn::nn
