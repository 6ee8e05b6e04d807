#include "nodkit/backbone.hpp"

#include <algorithm>
#include <cmath>

#include "nodkit/errors.hpp"

namespace nodkit {

using nn::Tensor;

Backbone::Backbone(const BackboneConfig& config, Rng& rng)
    : config_(config),
      stem_("backbone.stem", 1, config.base_channels, 3, 1, 1, rng),
      down2_("backbone.down2", config.base_channels, config.base_channels * 2, 2,
             2, 0, rng),
      down3_("backbone.down3", config.base_channels * 2, config.base_channels * 4,
             2, 2, 0, rng),
      down4_("backbone.down4", config.base_channels * 4, config.base_channels * 8,
             2, 2, 0, rng),
      up_("backbone.up", config.base_channels * 8, config.base_channels * 4, rng),
      up_bn_("backbone.up.bn", config.base_channels * 4),
      fuse_("backbone.fuse", config.base_channels * 8, config.base_channels * 4,
            3, 1, 1, rng) {
  const int C = config.base_channels;
  for (int b = 0; b < config.blocks_per_stage; ++b) {
    const std::string i = std::to_string(b);
    stage1_.push_back(std::make_unique<nn::ResBlock3d>("backbone.stage1." + i, C, rng));
    stage2_.push_back(std::make_unique<nn::ResBlock3d>("backbone.stage2." + i, 2 * C, rng));
    stage3_.push_back(std::make_unique<nn::ResBlock3d>("backbone.stage3." + i, 4 * C, rng));
    stage4_.push_back(std::make_unique<nn::ResBlock3d>("backbone.stage4." + i, 8 * C, rng));
  }
}

FeatureEndpoints Backbone::forward(const Tensor& input) {
  if (input.rank() != 4 || input.dim(0) != 1)
    throw InvalidInput("backbone: expected (1,D,H,W) input");
  const char* axis_names[3] = {"z", "y", "x"};
  for (int axis = 0; axis < 3; ++axis)
    if (input.dim(axis + 1) % 8 != 0)
      throw InvalidInput(std::string("backbone: input axis ") + axis_names[axis] +
                         " (" + std::to_string(input.dim(axis + 1)) +
                         ") must be divisible by 8");
  for (int64_t i = 0; i < input.numel(); ++i)
    if (!std::isfinite(input[i]))
      throw InvalidInput("backbone: non-finite input voxel");

  FeatureEndpoints ep;
  Tensor h = stem_.forward(input);
  for (auto& block : stage1_) h = block->forward(h);
  ep.down_1 = h;
  h = down2_.forward(h);
  for (auto& block : stage2_) h = block->forward(h);
  ep.down_2 = h;
  h = down3_.forward(h);
  for (auto& block : stage3_) h = block->forward(h);
  ep.down_4 = h;
  down4_cache_ = h;
  h = down4_.forward(h);
  for (auto& block : stage4_) h = block->forward(h);
  ep.deep = h;

  Tensor up = up_relu_.forward(up_bn_.forward(up_.forward(h)));
  ep.feature_map_4 = fuse_.forward(nn::concat_channels(up, down4_cache_));
  return ep;
}

void Backbone::backward(const EndpointGrads& grads) {
  const int64_t c4 = config_.stride4_channels();

  Tensor g_up, g_skip;
  if (!grads.feature_map_4.empty()) {
    Tensor g_concat = fuse_.backward(grads.feature_map_4);
    nn::split_channels(g_concat, c4, g_up, g_skip);
  }

  Tensor g_deep;
  if (!g_up.empty())
    g_deep = up_.backward(up_bn_.backward(up_relu_.backward(g_up)));

  // encoder, from the deep stage back up
  Tensor g = g_deep;
  if (!g.empty()) {
    for (auto it = stage4_.rbegin(); it != stage4_.rend(); ++it)
      g = (*it)->backward(g);
    g = down4_.backward(g);
  }

  // down_4 gathers: stage-4 path, decoder skip, external consumers
  Tensor g_down4 = g;
  if (g_down4.empty() && !g_skip.empty()) g_down4 = Tensor(g_skip.shape());
  if (g_down4.empty() && !grads.down_4.empty()) g_down4 = Tensor(grads.down_4.shape());
  if (!g_skip.empty())
    for (int64_t i = 0; i < g_down4.numel(); ++i) g_down4[i] += g_skip[i];
  if (!grads.down_4.empty())
    for (int64_t i = 0; i < g_down4.numel(); ++i) g_down4[i] += grads.down_4[i];
  if (g_down4.empty()) return;

  g = g_down4;
  for (auto it = stage3_.rbegin(); it != stage3_.rend(); ++it)
    g = (*it)->backward(g);
  g = down3_.backward(g);
  if (!grads.down_2.empty())
    for (int64_t i = 0; i < g.numel(); ++i) g[i] += grads.down_2[i];
  for (auto it = stage2_.rbegin(); it != stage2_.rend(); ++it)
    g = (*it)->backward(g);
  g = down2_.backward(g);
  if (!grads.down_1.empty())
    for (int64_t i = 0; i < g.numel(); ++i) g[i] += grads.down_1[i];
  for (auto it = stage1_.rbegin(); it != stage1_.rend(); ++it)
    g = (*it)->backward(g);
  stem_.backward(g);  // input grad discarded
}

void Backbone::collect_params(std::vector<nn::Parameter*>& out) {
  stem_.params(out);
  for (auto& b : stage1_) b->params(out);
  down2_.params(out);
  for (auto& b : stage2_) b->params(out);
  down3_.params(out);
  for (auto& b : stage3_) b->params(out);
  down4_.params(out);
  for (auto& b : stage4_) b->params(out);
  up_.params(out);
  up_bn_.params(out);
  fuse_.params(out);
}

void Backbone::set_training(bool training) {
  stem_.set_training(training);
  for (auto& b : stage1_) b->set_training(training);
  down2_.set_training(training);
  for (auto& b : stage2_) b->set_training(training);
  down3_.set_training(training);
  for (auto& b : stage3_) b->set_training(training);
  down4_.set_training(training);
  for (auto& b : stage4_) b->set_training(training);
  up_bn_.set_training(training);
  fuse_.set_training(training);
}

Tensor normalize_volume(const Volume& volume, const BackboneConfig& config) {
  const double lo = config.window_min, hi = config.window_max;
  if (!(hi > lo)) throw ConfigError("backbone.window_max must exceed window_min");
  Tensor out({1, volume.voxels.dim(0), volume.voxels.dim(1), volume.voxels.dim(2)});
  const double scale = 2.0 / (hi - lo);
  for (int64_t i = 0; i < volume.voxels.numel(); ++i) {
    const double v = std::clamp(static_cast<double>(volume.voxels[i]), lo, hi);
    out[i] = static_cast<float>((v - lo) * scale - 1.0);
  }
  return out;
}

namespace {

struct LayerStep {
  int kernel;
  int stride;
  bool transposed = false;
};

// Layer paths mirror the exact construction in Backbone::forward.
std::vector<LayerStep> endpoint_path(const BackboneConfig& config,
                                     const std::string& endpoint) {
  const int bps = config.blocks_per_stage;
  std::vector<LayerStep> path;
  const auto stage_blocks = [&](int count) {
    for (int b = 0; b < count; ++b) {
      path.push_back({3, 1});  // ResBlock conv path: two 3^3 convs
      path.push_back({3, 1});
    }
  };
  path.push_back({3, 1});  // stem
  stage_blocks(bps);
  if (endpoint == "down_1") return path;
  path.push_back({2, 2});
  stage_blocks(bps);
  if (endpoint == "down_2") return path;
  path.push_back({2, 2});
  stage_blocks(bps);
  if (endpoint == "down_4") return path;
  path.push_back({2, 2});
  stage_blocks(bps);
  if (endpoint == "deep") return path;
  if (endpoint == "feature_map_4" || endpoint == "ncs_logit") {
    path.push_back({2, 2, true});  // decoder upsample
    path.push_back({3, 1});        // fusion conv (skip branch rf is smaller)
    if (endpoint == "ncs_logit") {
      path.push_back({3, 1});  // NCS 3x3x3 conv; the 1x1x1 outputs add nothing
      path.push_back({1, 1});
    }
    return path;
  }
  throw InvalidInput("receptive_field: unknown endpoint '" + endpoint + "'");
}

}  // namespace

int receptive_field(const BackboneConfig& config, const std::string& endpoint) {
  if (endpoint == "dfpr_input") {
    // down_4 features sampled with trilinear interpolation: one extra cell
    // of context on each side at jump 4.
    return receptive_field(config, "down_4") + 4;
  }
  int64_t rf = 1, jump = 1;
  for (const LayerStep& step : endpoint_path(config, endpoint)) {
    if (step.transposed) {
      jump /= step.stride;
    } else {
      rf += static_cast<int64_t>(step.kernel - 1) * jump;
      jump *= step.stride;
    }
  }
  return static_cast<int>(rf);
}

}  // namespace nodkit
