#pragma once

#include <memory>
#include <string>
#include <vector>

#include "nodkit/nn/layers.hpp"
#include "nodkit/volume.hpp"

namespace nodkit {

struct BackboneConfig {
  int base_channels = 8;      // desk-scale default; 24 at full scale
  int blocks_per_stage = 2;
  double window_min = -1.0;   // intensity window mapped onto [-1,1]
  double window_max = 2.0;

  // Channel width of the stride-4 endpoints (down_4 and feature_map_4).
  int stride4_channels() const { return base_channels * 4; }
  int deep_channels() const { return base_channels * 8; }
};

// Named activations of one forward pass. down_* live on the encoder path;
// feature_map_4 is the stride-4 decoder output fusing deep context.
struct FeatureEndpoints {
  nn::Tensor down_1;         // stride 1, C channels
  nn::Tensor down_2;         // stride 2, 2C
  nn::Tensor down_4;         // stride 4, 4C (encoder, pre-fusion)
  nn::Tensor deep;           // stride 8, 8C
  nn::Tensor feature_map_4;  // stride 4, 4C (decoder)
};

// External gradients flowing into the endpoints (heads, crops, pooling).
// Empty tensors mean no contribution.
struct EndpointGrads {
  Tensor feature_map_4;
  Tensor down_4;
  Tensor down_2;
  Tensor down_1;
};

// Encoder-decoder feature extractor: residual conv stages at strides
// 1,2,4,8, one transposed-conv decoder step fusing the stride-4 skip.
class Backbone {
 public:
  Backbone(const BackboneConfig& config, Rng& rng);

  FeatureEndpoints forward(const Tensor& input);  // input (1,D,H,W)
  void backward(const EndpointGrads& grads);

  void collect_params(std::vector<nn::Parameter*>& out);
  void set_training(bool training);

  const BackboneConfig& config() const { return config_; }

 private:
  BackboneConfig config_;
  nn::ConvBlock3d stem_;
  std::vector<std::unique_ptr<nn::ResBlock3d>> stage1_;
  nn::ConvBlock3d down2_;
  std::vector<std::unique_ptr<nn::ResBlock3d>> stage2_;
  nn::ConvBlock3d down3_;
  std::vector<std::unique_ptr<nn::ResBlock3d>> stage3_;
  nn::ConvBlock3d down4_;
  std::vector<std::unique_ptr<nn::ResBlock3d>> stage4_;
  nn::ConvTranspose3d up_;
  nn::BatchNorm3d up_bn_;
  nn::ReLU up_relu_;
  nn::ConvBlock3d fuse_;

  Tensor down4_cache_;  // stride-4 encoder output, needed to rebuild concat grad
};

// Map stored intensities onto [-1,1] for the given window, clamping outside.
Tensor normalize_volume(const Volume& volume, const BackboneConfig& config);

// Analytic receptive field (edge length in input voxels) of a named
// endpoint: "down_1", "down_2", "down_4", "deep", "feature_map_4", plus the
// head paths "ncs_logit" and "dfpr_input". Computed with the
// rf <- rf + (k-1)*jump, jump <- jump*stride recurrence over the endpoint's
// layer path; the k2/s2 transposed-conv step halves the jump and leaves rf
// unchanged (each upsampled cell draws on exactly one input cell).
int receptive_field(const BackboneConfig& config, const std::string& endpoint);

}  // namespace nodkit
