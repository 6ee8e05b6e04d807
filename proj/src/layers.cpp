#include "nodkit/nn/layers.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "nodkit/errors.hpp"

namespace nodkit::nn {

namespace {

void he_init(Tensor& w, int64_t fan_in, Rng& rng) {
  const double sd = std::sqrt(2.0 / static_cast<double>(fan_in));
  for (int64_t i = 0; i < w.numel(); ++i)
    w[i] = static_cast<float>(rng.normal(0.0, sd));
}

int64_t conv_out_dim(int64_t in, int k, int s, int p) {
  return (in + 2 * p - k) / s + 1;
}

}  // namespace

// ---------------------------------------------------------------------------
// Conv3d
// ---------------------------------------------------------------------------

Conv3d::Conv3d(std::string name, int in_ch, int out_ch, int kernel, int stride,
               int pad, Rng& rng, bool zero_init)
    : in_ch_(in_ch), out_ch_(out_ch), kernel_(kernel), stride_(stride), pad_(pad) {
  weight.name = name + ".weight";
  weight.value = Tensor({out_ch, in_ch, kernel, kernel, kernel});
  weight.grad = Tensor({out_ch, in_ch, kernel, kernel, kernel});
  bias.name = name + ".bias";
  bias.value = Tensor({out_ch});
  bias.grad = Tensor({out_ch});
  if (!zero_init)
    he_init(weight.value, static_cast<int64_t>(in_ch) * kernel * kernel * kernel, rng);
}

Tensor Conv3d::forward(const Tensor& x) {
  if (x.rank() != 4 || x.dim(0) != in_ch_)
    throw InvalidInput("Conv3d " + weight.name + ": expected (" +
                       std::to_string(in_ch_) + ",D,H,W) input");
  input_ = x;
  const int64_t D = x.dim(1), H = x.dim(2), W = x.dim(3);
  const int64_t OD = conv_out_dim(D, kernel_, stride_, pad_);
  const int64_t OH = conv_out_dim(H, kernel_, stride_, pad_);
  const int64_t OW = conv_out_dim(W, kernel_, stride_, pad_);
  Tensor out({out_ch_, OD, OH, OW});

  const float* wp = weight.value.data();
  const float* xp = x.data();
  float* op = out.data();
  const int64_t k = kernel_, s = stride_, p = pad_;
  const int64_t in_ch = in_ch_;

#pragma omp parallel for schedule(static)
  for (int64_t co = 0; co < out_ch_; ++co) {
    const float b = bias.value[co];
    for (int64_t oz = 0; oz < OD; ++oz) {
      for (int64_t oy = 0; oy < OH; ++oy) {
        float* orow = op + ((co * OD + oz) * OH + oy) * OW;
        for (int64_t ox = 0; ox < OW; ++ox) orow[ox] = b;
        for (int64_t ci = 0; ci < in_ch; ++ci) {
          for (int64_t kz = 0; kz < k; ++kz) {
            const int64_t iz = oz * s - p + kz;
            if (iz < 0 || iz >= D) continue;
            for (int64_t ky = 0; ky < k; ++ky) {
              const int64_t iy = oy * s - p + ky;
              if (iy < 0 || iy >= H) continue;
              const float* xrow = xp + ((ci * D + iz) * H + iy) * W;
              const float* wrow =
                  wp + (((co * in_ch + ci) * k + kz) * k + ky) * k;
              for (int64_t kx = 0; kx < k; ++kx) {
                const float wv = wrow[kx];
                const int64_t x0 = -p + kx;
                if (s == 1) {
                  // contiguous inner loop over ox with shifted input row
                  const int64_t lo = std::max<int64_t>(0, -x0);
                  const int64_t hi = std::min<int64_t>(OW, W - x0);
                  const float* xs = xrow + x0;
                  for (int64_t ox = lo; ox < hi; ++ox)
                    orow[ox] += wv * xs[ox];
                } else {
                  for (int64_t ox = 0; ox < OW; ++ox) {
                    const int64_t ix = ox * s + x0;
                    if (ix < 0 || ix >= W) continue;
                    orow[ox] += wv * xrow[ix];
                  }
                }
              }
            }
          }
        }
      }
    }
  }
  return out;
}

Tensor Conv3d::backward(const Tensor& grad_out) {
  const Tensor& x = input_;
  const int64_t D = x.dim(1), H = x.dim(2), W = x.dim(3);
  const int64_t OD = grad_out.dim(1), OH = grad_out.dim(2), OW = grad_out.dim(3);
  const int64_t k = kernel_, s = stride_, p = pad_;
  const int64_t in_ch = in_ch_, out_ch = out_ch_;
  const float* gp = grad_out.data();
  const float* xp = x.data();
  const float* wp = weight.value.data();

  // bias and weight grads: one output channel per thread
#pragma omp parallel for schedule(static)
  for (int64_t co = 0; co < out_ch; ++co) {
    double gb = 0;
    for (int64_t oz = 0; oz < OD; ++oz)
      for (int64_t oy = 0; oy < OH; ++oy) {
        const float* grow = gp + ((co * OD + oz) * OH + oy) * OW;
        for (int64_t ox = 0; ox < OW; ++ox) gb += grow[ox];
      }
    bias.grad[co] += static_cast<float>(gb);

    float* wg = weight.grad.data() + co * in_ch * k * k * k;
    for (int64_t ci = 0; ci < in_ch; ++ci)
      for (int64_t kz = 0; kz < k; ++kz)
        for (int64_t ky = 0; ky < k; ++ky)
          for (int64_t kx = 0; kx < k; ++kx) {
            double acc = 0;
            for (int64_t oz = 0; oz < OD; ++oz) {
              const int64_t iz = oz * s - p + kz;
              if (iz < 0 || iz >= D) continue;
              for (int64_t oy = 0; oy < OH; ++oy) {
                const int64_t iy = oy * s - p + ky;
                if (iy < 0 || iy >= H) continue;
                const float* grow = gp + ((co * OD + oz) * OH + oy) * OW;
                const float* xrow = xp + ((ci * D + iz) * H + iy) * W;
                const int64_t x0 = -p + kx;
                if (s == 1) {
                  const int64_t lo = std::max<int64_t>(0, -x0);
                  const int64_t hi = std::min<int64_t>(OW, W - x0);
                  const float* xs = xrow + x0;
                  for (int64_t ox = lo; ox < hi; ++ox) acc += grow[ox] * xs[ox];
                } else {
                  for (int64_t ox = 0; ox < OW; ++ox) {
                    const int64_t ix = ox * s + x0;
                    if (ix < 0 || ix >= W) continue;
                    acc += grow[ox] * xrow[ix];
                  }
                }
              }
            }
            wg[((ci * k + kz) * k + ky) * k + kx] += static_cast<float>(acc);
          }
  }

  // input grad: one input channel per thread
  Tensor grad_in({in_ch, D, H, W});
  float* gip = grad_in.data();
#pragma omp parallel for schedule(static)
  for (int64_t ci = 0; ci < in_ch; ++ci) {
    for (int64_t co = 0; co < out_ch; ++co) {
      const float* wrow = wp + (co * in_ch + ci) * k * k * k;
      for (int64_t oz = 0; oz < OD; ++oz)
        for (int64_t kz = 0; kz < k; ++kz) {
          const int64_t iz = oz * s - p + kz;
          if (iz < 0 || iz >= D) continue;
          for (int64_t oy = 0; oy < OH; ++oy)
            for (int64_t ky = 0; ky < k; ++ky) {
              const int64_t iy = oy * s - p + ky;
              if (iy < 0 || iy >= H) continue;
              const float* grow = gp + ((co * OD + oz) * OH + oy) * OW;
              float* girow = gip + ((ci * D + iz) * H + iy) * W;
              for (int64_t kx = 0; kx < k; ++kx) {
                const float wv = wrow[(kz * k + ky) * k + kx];
                const int64_t x0 = -p + kx;
                if (s == 1) {
                  const int64_t lo = std::max<int64_t>(0, -x0);
                  const int64_t hi = std::min<int64_t>(OW, W - x0);
                  float* gis = girow + x0;
                  for (int64_t ox = lo; ox < hi; ++ox) gis[ox] += wv * grow[ox];
                } else {
                  for (int64_t ox = 0; ox < OW; ++ox) {
                    const int64_t ix = ox * s + x0;
                    if (ix < 0 || ix >= W) continue;
                    girow[ix] += wv * grow[ox];
                  }
                }
              }
            }
        }
    }
  }
  return grad_in;
}

void Conv3d::params(std::vector<Parameter*>& out) {
  out.push_back(&weight);
  out.push_back(&bias);
}

// ---------------------------------------------------------------------------
// ConvTranspose3d (k=2, s=2)
// ---------------------------------------------------------------------------

ConvTranspose3d::ConvTranspose3d(std::string name, int in_ch, int out_ch, Rng& rng)
    : in_ch_(in_ch), out_ch_(out_ch) {
  weight.name = name + ".weight";
  weight.value = Tensor({in_ch, out_ch, 2, 2, 2});
  weight.grad = Tensor({in_ch, out_ch, 2, 2, 2});
  bias.name = name + ".bias";
  bias.value = Tensor({out_ch});
  bias.grad = Tensor({out_ch});
  he_init(weight.value, in_ch, rng);
}

Tensor ConvTranspose3d::forward(const Tensor& x) {
  if (x.rank() != 4 || x.dim(0) != in_ch_)
    throw InvalidInput("ConvTranspose3d " + weight.name + ": bad input shape");
  input_ = x;
  const int64_t D = x.dim(1), H = x.dim(2), W = x.dim(3);
  Tensor out({out_ch_, D * 2, H * 2, W * 2});
  const int64_t OD = D * 2, OH = H * 2, OW = W * 2;

#pragma omp parallel for schedule(static)
  for (int64_t co = 0; co < out_ch_; ++co) {
    const float b = bias.value[co];
    for (int64_t oz = 0; oz < OD; ++oz) {
      const int64_t iz = oz / 2, kz = oz % 2;
      for (int64_t oy = 0; oy < OH; ++oy) {
        const int64_t iy = oy / 2, ky = oy % 2;
        float* orow = out.data() + ((co * OD + oz) * OH + oy) * OW;
        for (int64_t ox = 0; ox < OW; ++ox) orow[ox] = b;
        for (int64_t ci = 0; ci < in_ch_; ++ci) {
          const float* xrow = input_.data() + ((ci * D + iz) * H + iy) * W;
          const float* wbase =
              weight.value.data() + ((ci * out_ch_ + co) * 2 + kz) * 4 + ky * 2;
          const float w0 = wbase[0], w1 = wbase[1];
          for (int64_t ox = 0; ox < OW; ++ox)
            orow[ox] += (ox % 2 ? w1 : w0) * xrow[ox / 2];
        }
      }
    }
  }
  return out;
}

Tensor ConvTranspose3d::backward(const Tensor& grad_out) {
  const Tensor& x = input_;
  const int64_t D = x.dim(1), H = x.dim(2), W = x.dim(3);
  const int64_t OD = D * 2, OH = H * 2, OW = W * 2;
  const float* gp = grad_out.data();

#pragma omp parallel for schedule(static)
  for (int64_t co = 0; co < out_ch_; ++co) {
    double gb = 0;
    for (int64_t oz = 0; oz < OD; ++oz)
      for (int64_t oy = 0; oy < OH; ++oy) {
        const float* grow = gp + ((co * OD + oz) * OH + oy) * OW;
        for (int64_t ox = 0; ox < OW; ++ox) gb += grow[ox];
      }
    bias.grad[co] += static_cast<float>(gb);
  }

#pragma omp parallel for schedule(static)
  for (int64_t ci = 0; ci < in_ch_; ++ci) {
    for (int64_t co = 0; co < out_ch_; ++co)
      for (int kz = 0; kz < 2; ++kz)
        for (int ky = 0; ky < 2; ++ky)
          for (int kx = 0; kx < 2; ++kx) {
            double acc = 0;
            for (int64_t iz = 0; iz < D; ++iz)
              for (int64_t iy = 0; iy < H; ++iy) {
                const float* grow =
                    gp + ((co * OD + iz * 2 + kz) * OH + iy * 2 + ky) * OW;
                const float* xrow = x.data() + ((ci * D + iz) * H + iy) * W;
                for (int64_t ix = 0; ix < W; ++ix)
                  acc += grow[ix * 2 + kx] * xrow[ix];
              }
            weight.grad[(((ci * out_ch_ + co) * 2 + kz) * 2 + ky) * 2 + kx] +=
                static_cast<float>(acc);
          }
  }

  Tensor grad_in({in_ch_, D, H, W});
#pragma omp parallel for schedule(static)
  for (int64_t ci = 0; ci < in_ch_; ++ci) {
    for (int64_t iz = 0; iz < D; ++iz)
      for (int64_t iy = 0; iy < H; ++iy) {
        float* girow = grad_in.data() + ((ci * D + iz) * H + iy) * W;
        for (int64_t co = 0; co < out_ch_; ++co)
          for (int kz = 0; kz < 2; ++kz)
            for (int ky = 0; ky < 2; ++ky) {
              const float* grow =
                  gp + ((co * OD + iz * 2 + kz) * OH + iy * 2 + ky) * OW;
              const float* wbase = weight.value.data() +
                                   ((ci * out_ch_ + co) * 2 + kz) * 4 + ky * 2;
              const float w0 = wbase[0], w1 = wbase[1];
              for (int64_t ix = 0; ix < W; ++ix)
                girow[ix] += w0 * grow[ix * 2] + w1 * grow[ix * 2 + 1];
            }
      }
  }
  return grad_in;
}

void ConvTranspose3d::params(std::vector<Parameter*>& out) {
  out.push_back(&weight);
  out.push_back(&bias);
}

// ---------------------------------------------------------------------------
// BatchNorm3d
// ---------------------------------------------------------------------------

BatchNorm3d::BatchNorm3d(std::string name, int channels) : channels_(channels) {
  gamma.name = name + ".gamma";
  gamma.value = Tensor::full({channels}, 1.0f);
  gamma.grad = Tensor({channels});
  beta.name = name + ".beta";
  beta.value = Tensor({channels});
  beta.grad = Tensor({channels});
  running_mean = Tensor({channels});
  running_var = Tensor::full({channels}, 1.0f);
}

Tensor BatchNorm3d::forward(const Tensor& x) {
  const int64_t C = x.dim(0), n = x.dim(1) * x.dim(2) * x.dim(3);
  Tensor out(x.shape());
  if (training_) {
    xhat_ = Tensor(x.shape());
    inv_std_.assign(static_cast<size_t>(C), 0.0f);
#pragma omp parallel for schedule(static)
    for (int64_t c = 0; c < C; ++c) {
      const float* xc = x.data() + c * n;
      double sum = 0;
      for (int64_t i = 0; i < n; ++i) sum += xc[i];
      const double mean = sum / static_cast<double>(n);
      double var = 0;
      for (int64_t i = 0; i < n; ++i) {
        const double d = xc[i] - mean;
        var += d * d;
      }
      var /= static_cast<double>(n);
      const float istd = static_cast<float>(1.0 / std::sqrt(var + kEps));
      inv_std_[static_cast<size_t>(c)] = istd;
      const float g = gamma.value[c], b = beta.value[c], m = static_cast<float>(mean);
      float* hc = xhat_.data() + c * n;
      float* oc = out.data() + c * n;
      for (int64_t i = 0; i < n; ++i) {
        hc[i] = (xc[i] - m) * istd;
        oc[i] = g * hc[i] + b;
      }
      running_mean[c] = (1 - kMomentum) * running_mean[c] + kMomentum * m;
      running_var[c] =
          (1 - kMomentum) * running_var[c] + kMomentum * static_cast<float>(var);
    }
  } else {
#pragma omp parallel for schedule(static)
    for (int64_t c = 0; c < C; ++c) {
      const float istd = 1.0f / std::sqrt(running_var[c] + kEps);
      const float g = gamma.value[c], b = beta.value[c], m = running_mean[c];
      const float* xc = x.data() + c * n;
      float* oc = out.data() + c * n;
      for (int64_t i = 0; i < n; ++i) oc[i] = g * (xc[i] - m) * istd + b;
    }
  }
  return out;
}

Tensor BatchNorm3d::backward(const Tensor& grad_out) {
  const int64_t C = grad_out.dim(0);
  const int64_t n = grad_out.dim(1) * grad_out.dim(2) * grad_out.dim(3);
  Tensor grad_in(grad_out.shape());
  if (!training_) {
#pragma omp parallel for schedule(static)
    for (int64_t c = 0; c < C; ++c) {
      const float istd = 1.0f / std::sqrt(running_var[c] + kEps);
      const float g = gamma.value[c];
      const float* gc = grad_out.data() + c * n;
      float* ic = grad_in.data() + c * n;
      for (int64_t i = 0; i < n; ++i) ic[i] = gc[i] * g * istd;
    }
    return grad_in;
  }
#pragma omp parallel for schedule(static)
  for (int64_t c = 0; c < C; ++c) {
    const float* gc = grad_out.data() + c * n;
    const float* hc = xhat_.data() + c * n;
    double sum_g = 0, sum_gh = 0;
    for (int64_t i = 0; i < n; ++i) {
      sum_g += gc[i];
      sum_gh += gc[i] * hc[i];
    }
    gamma.grad[c] += static_cast<float>(sum_gh);
    beta.grad[c] += static_cast<float>(sum_g);
    const float g = gamma.value[c];
    const float istd = inv_std_[static_cast<size_t>(c)];
    const float mean_g = static_cast<float>(sum_g / static_cast<double>(n));
    const float mean_gh = static_cast<float>(sum_gh / static_cast<double>(n));
    float* ic = grad_in.data() + c * n;
    for (int64_t i = 0; i < n; ++i)
      ic[i] = g * istd * (gc[i] - mean_g - hc[i] * mean_gh);
  }
  return grad_in;
}

void BatchNorm3d::params(std::vector<Parameter*>& out) {
  out.push_back(&gamma);
  out.push_back(&beta);
}

// ---------------------------------------------------------------------------
// ReLU / Linear
// ---------------------------------------------------------------------------

Tensor ReLU::forward(const Tensor& x) {
  Tensor out(x.shape());
  for (int64_t i = 0; i < x.numel(); ++i) out[i] = x[i] > 0 ? x[i] : 0.0f;
  output_ = out;
  return out;
}

Tensor ReLU::backward(const Tensor& grad_out) {
  Tensor grad_in(grad_out.shape());
  for (int64_t i = 0; i < grad_out.numel(); ++i)
    grad_in[i] = output_[i] > 0 ? grad_out[i] : 0.0f;
  return grad_in;
}

Linear::Linear(std::string name, int in_features, int out_features, Rng& rng,
               bool zero_init)
    : in_features_(in_features), out_features_(out_features) {
  weight.name = name + ".weight";
  weight.value = Tensor({out_features, in_features});
  weight.grad = Tensor({out_features, in_features});
  bias.name = name + ".bias";
  bias.value = Tensor({out_features});
  bias.grad = Tensor({out_features});
  if (!zero_init) he_init(weight.value, in_features, rng);
}

Tensor Linear::forward(const Tensor& x) {
  if (x.rank() != 2 || x.dim(1) != in_features_)
    throw InvalidInput("Linear " + weight.name + ": bad input shape");
  input_ = x;
  const int64_t N = x.dim(0);
  Tensor out({N, out_features_});
#pragma omp parallel for schedule(static)
  for (int64_t o = 0; o < out_features_; ++o) {
    const float* wrow = weight.value.data() + o * in_features_;
    for (int64_t nrow = 0; nrow < N; ++nrow) {
      const float* xrow = x.data() + nrow * in_features_;
      double acc = bias.value[o];
      for (int64_t i = 0; i < in_features_; ++i) acc += wrow[i] * xrow[i];
      out[nrow * out_features_ + o] = static_cast<float>(acc);
    }
  }
  return out;
}

Tensor Linear::backward(const Tensor& grad_out) {
  const int64_t N = input_.dim(0);
#pragma omp parallel for schedule(static)
  for (int64_t o = 0; o < out_features_; ++o) {
    float* wg = weight.grad.data() + o * in_features_;
    double gb = 0;
    for (int64_t nrow = 0; nrow < N; ++nrow) {
      const float g = grad_out[nrow * out_features_ + o];
      gb += g;
      const float* xrow = input_.data() + nrow * in_features_;
      for (int64_t i = 0; i < in_features_; ++i) wg[i] += g * xrow[i];
    }
    bias.grad[o] += static_cast<float>(gb);
  }
  Tensor grad_in({N, in_features_});
#pragma omp parallel for schedule(static)
  for (int64_t nrow = 0; nrow < N; ++nrow) {
    float* irow = grad_in.data() + nrow * in_features_;
    for (int64_t o = 0; o < out_features_; ++o) {
      const float g = grad_out[nrow * out_features_ + o];
      const float* wrow = weight.value.data() + o * in_features_;
      for (int64_t i = 0; i < in_features_; ++i) irow[i] += g * wrow[i];
    }
  }
  return grad_in;
}

void Linear::params(std::vector<Parameter*>& out) {
  out.push_back(&weight);
  out.push_back(&bias);
}

// ---------------------------------------------------------------------------
// Blocks
// ---------------------------------------------------------------------------

ResBlock3d::ResBlock3d(const std::string& name, int channels, Rng& rng)
    : conv1_(name + ".conv1", channels, channels, 3, 1, 1, rng),
      bn1_(name + ".bn1", channels),
      conv2_(name + ".conv2", channels, channels, 3, 1, 1, rng),
      bn2_(name + ".bn2", channels) {}

Tensor ResBlock3d::forward(const Tensor& x) {
  Tensor h = relu1_.forward(bn1_.forward(conv1_.forward(x)));
  h = bn2_.forward(conv2_.forward(h));
  pre_act_ = Tensor(h.shape());
  for (int64_t i = 0; i < h.numel(); ++i) pre_act_[i] = h[i] + x[i];
  Tensor out(pre_act_.shape());
  for (int64_t i = 0; i < out.numel(); ++i)
    out[i] = pre_act_[i] > 0 ? pre_act_[i] : 0.0f;
  return out;
}

Tensor ResBlock3d::backward(const Tensor& grad_out) {
  Tensor g(grad_out.shape());
  for (int64_t i = 0; i < g.numel(); ++i)
    g[i] = pre_act_[i] > 0 ? grad_out[i] : 0.0f;
  Tensor gpath = conv1_.backward(
      bn1_.backward(relu1_.backward(conv2_.backward(bn2_.backward(g)))));
  for (int64_t i = 0; i < gpath.numel(); ++i) gpath[i] += g[i];  // skip path
  return gpath;
}

void ResBlock3d::params(std::vector<Parameter*>& out) {
  conv1_.params(out);
  bn1_.params(out);
  conv2_.params(out);
  bn2_.params(out);
}

void ResBlock3d::set_training(bool training) {
  bn1_.set_training(training);
  bn2_.set_training(training);
}

ConvBlock3d::ConvBlock3d(const std::string& name, int in_ch, int out_ch,
                         int kernel, int stride, int pad, Rng& rng)
    : conv_(name + ".conv", in_ch, out_ch, kernel, stride, pad, rng),
      bn_(name + ".bn", out_ch) {}

Tensor ConvBlock3d::forward(const Tensor& x) {
  return relu_.forward(bn_.forward(conv_.forward(x)));
}

Tensor ConvBlock3d::backward(const Tensor& grad_out) {
  return conv_.backward(bn_.backward(relu_.backward(grad_out)));
}

void ConvBlock3d::params(std::vector<Parameter*>& out) {
  conv_.params(out);
  bn_.params(out);
}

void ConvBlock3d::set_training(bool training) { bn_.set_training(training); }

// ---------------------------------------------------------------------------
// Optimizer and channel utilities
// ---------------------------------------------------------------------------

SgdOptimizer::SgdOptimizer(std::vector<Parameter*> params, double momentum,
                           double weight_decay)
    : params_(std::move(params)), momentum_(momentum), weight_decay_(weight_decay) {
  for (auto* p : params_) velocity_.emplace_back(p->value.shape());
}

void SgdOptimizer::step(double lr) {
  const float mu = static_cast<float>(momentum_);
  const float wd = static_cast<float>(weight_decay_);
  const float eta = static_cast<float>(lr);
  for (size_t pi = 0; pi < params_.size(); ++pi) {
    Parameter& p = *params_[pi];
    Tensor& v = velocity_[pi];
    for (int64_t i = 0; i < p.value.numel(); ++i) {
      v[i] = mu * v[i] + p.grad[i] + wd * p.value[i];
      p.value[i] -= eta * v[i];
    }
  }
}

void SgdOptimizer::zero_grad() {
  for (auto* p : params_) p->zero_grad();
}

Tensor concat_channels(const Tensor& a, const Tensor& b) {
  if (a.dim(1) != b.dim(1) || a.dim(2) != b.dim(2) || a.dim(3) != b.dim(3))
    throw InvalidInput("concat_channels: spatial shape mismatch");
  Tensor out({a.dim(0) + b.dim(0), a.dim(1), a.dim(2), a.dim(3)});
  std::memcpy(out.data(), a.data(), static_cast<size_t>(a.numel()) * sizeof(float));
  std::memcpy(out.data() + a.numel(), b.data(),
              static_cast<size_t>(b.numel()) * sizeof(float));
  return out;
}

void split_channels(const Tensor& grad, int64_t a_channels, Tensor& grad_a,
                    Tensor& grad_b) {
  const int64_t spatial = grad.dim(1) * grad.dim(2) * grad.dim(3);
  grad_a = Tensor({a_channels, grad.dim(1), grad.dim(2), grad.dim(3)});
  grad_b = Tensor({grad.dim(0) - a_channels, grad.dim(1), grad.dim(2), grad.dim(3)});
  std::memcpy(grad_a.data(), grad.data(),
              static_cast<size_t>(grad_a.numel()) * sizeof(float));
  std::memcpy(grad_b.data(), grad.data() + a_channels * spatial,
              static_cast<size_t>(grad_b.numel()) * sizeof(float));
}

}  // namespace nodkit::nn
