#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nodkit/rng.hpp"
#include "nodkit/tensor.hpp"

// Minimal 3D layer zoo with hand-written backward passes. Forward runs cache
// whatever backward needs; one forward pairs with at most one backward
// (single-caller contract). Parallel loops are arranged so each output
// element is owned by exactly one thread, which keeps results bit-identical
// for any thread count.
namespace nodkit::nn {

struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;

  void zero_grad() { grad.zero(); }
};

class Layer {
 public:
  virtual ~Layer() = default;
  virtual void params(std::vector<Parameter*>& out) = 0;
  virtual void set_training(bool training) {}
};

// 3D convolution over (C,D,H,W) maps. Odd kernels use same padding by
// default; the k=2,s=2 form is the encoder downsampler (no padding).
class Conv3d : public Layer {
 public:
  Conv3d(std::string name, int in_ch, int out_ch, int kernel, int stride, int pad,
         Rng& rng, bool zero_init = false);

  Tensor forward(const Tensor& x);
  Tensor backward(const Tensor& grad_out);

  void params(std::vector<Parameter*>& out) override;

  int in_ch() const { return in_ch_; }
  int out_ch() const { return out_ch_; }
  int kernel() const { return kernel_; }
  int stride() const { return stride_; }
  int pad() const { return pad_; }

  Parameter weight;  // (out,in,k,k,k)
  Parameter bias;    // (out)

 private:
  int in_ch_, out_ch_, kernel_, stride_, pad_;
  Tensor input_;  // cached for backward
};

// Transposed conv, kernel 2 stride 2: exact x2 upsampling where every output
// voxel has a single input tap.
class ConvTranspose3d : public Layer {
 public:
  ConvTranspose3d(std::string name, int in_ch, int out_ch, Rng& rng);

  Tensor forward(const Tensor& x);
  Tensor backward(const Tensor& grad_out);

  void params(std::vector<Parameter*>& out) override;

  Parameter weight;  // (in,out,2,2,2)
  Parameter bias;    // (out)

 private:
  int in_ch_, out_ch_;
  Tensor input_;
};

// Per-channel batch normalization over the spatial dims of a single volume.
// Training mode normalizes with batch statistics and updates running
// estimates; eval mode applies the running affine map voxel-wise.
class BatchNorm3d : public Layer {
 public:
  BatchNorm3d(std::string name, int channels);

  Tensor forward(const Tensor& x);
  Tensor backward(const Tensor& grad_out);

  void params(std::vector<Parameter*>& out) override;
  void set_training(bool training) override { training_ = training; }

  Parameter gamma;         // scale, init 1
  Parameter beta;          // shift, init 0
  Tensor running_mean;     // buffers, checkpointed but not optimized
  Tensor running_var;

  static constexpr float kEps = 1e-5f;
  static constexpr float kMomentum = 0.1f;

 private:
  int channels_;
  bool training_ = true;
  Tensor xhat_;            // cached normalized input
  std::vector<float> inv_std_;
};

class ReLU {
 public:
  Tensor forward(const Tensor& x);
  Tensor backward(const Tensor& grad_out);

 private:
  Tensor output_;
};

// Fully connected layer over (N,in) batches.
class Linear : public Layer {
 public:
  Linear(std::string name, int in_features, int out_features, Rng& rng,
         bool zero_init = false);

  Tensor forward(const Tensor& x);
  Tensor backward(const Tensor& grad_out);

  void params(std::vector<Parameter*>& out) override;

  Parameter weight;  // (out,in)
  Parameter bias;    // (out)

 private:
  int in_features_, out_features_;
  Tensor input_;
};

// conv-bn-relu-conv-bn + identity skip, relu. Channel count is preserved.
class ResBlock3d : public Layer {
 public:
  ResBlock3d(const std::string& name, int channels, Rng& rng);

  Tensor forward(const Tensor& x);
  Tensor backward(const Tensor& grad_out);

  void params(std::vector<Parameter*>& out) override;
  void set_training(bool training) override;

 private:
  Conv3d conv1_;
  BatchNorm3d bn1_;
  ReLU relu1_;
  Conv3d conv2_;
  BatchNorm3d bn2_;
  Tensor pre_act_;  // conv path + skip, before the final relu
};

// conv(+bn)+relu unit used for stems, downsamplers and decoder fusion.
class ConvBlock3d : public Layer {
 public:
  ConvBlock3d(const std::string& name, int in_ch, int out_ch, int kernel,
              int stride, int pad, Rng& rng);

  Tensor forward(const Tensor& x);
  Tensor backward(const Tensor& grad_out);

  void params(std::vector<Parameter*>& out) override;
  void set_training(bool training) override;

  const Conv3d& conv() const { return conv_; }

 private:
  Conv3d conv_;
  BatchNorm3d bn_;
  ReLU relu_;
};

// SGD with momentum and decoupled-from-nothing classic L2 penalty:
//   v <- mu*v + g + wd*w ; w <- w - lr*v
class SgdOptimizer {
 public:
  SgdOptimizer(std::vector<Parameter*> params, double momentum,
               double weight_decay);

  void step(double lr);
  void zero_grad();

 private:
  std::vector<Parameter*> params_;
  std::vector<Tensor> velocity_;
  double momentum_, weight_decay_;
};

// Utility: concatenate two (C,D,H,W) maps along channels, and split a
// channel gradient back apart.
Tensor concat_channels(const Tensor& a, const Tensor& b);
void split_channels(const Tensor& grad, int64_t a_channels, Tensor& grad_a,
                    Tensor& grad_b);

}  // namespace nodkit::nn
