#pragma once

#include <random>
#include <string>
#include <utility>
#include <vector>

#include "skelet/ops.hpp"

namespace skelet {

struct IPConfig {
  Index max_persons = 10;
  Index in_channels = 3;
  Index channels = 32;  // embedding width
  Index joints = 65;
  /// Inputs with more than max_persons instances are cropped to the first
  /// max_persons when set, rejected otherwise.
  bool crop_overflow = true;

  void validate() const;
};

struct IPParams {
  Parameter embed_weight;   // (Cin, C)
  Parameter embed_bias;     // (C)
  Parameter encoding;       // (J, C) keypoint positional encoding
  Parameter concat_weight;  // (I*C, C)
  Parameter concat_bias;    // (C)

  std::vector<std::pair<std::string, Parameter*>> named_parameters();
};

IPParams init_ip_params(const IPConfig& cfg, std::mt19937_64& rng);

/// Crops to the first cfg.max_persons instances; smaller inputs pass
/// through unchanged.
Tensor crop_persons(const Tensor& x, const IPConfig& cfg);

/// (I, J, T, Cin) -> (I, J, T, C): per-point linear map plus the joint's
/// positional encoding.
Var embed_instances(Var x, const IPConfig& cfg, IPParams& params);

/// (I, J, T, C) -> (1, J, T, C): per (j, t) the I feature vectors are laid
/// end to end and mapped back to C channels through the first I*C rows of
/// the concat weight, so absent persons contribute nothing.
Var concat_pool(Var y, IPParams& params);

/// (I, J, T, C) -> (J, T, C) elementwise maximum over instances.
Var group_pool(Var z);

/// Y' = group_pool(relu(concat_pool(Y) + Y)) with Y = embed_instances(x).
/// Inputs with more than cfg.max_persons instances are cropped first.
Var instance_pool(Var x, const IPConfig& cfg, IPParams& params);

}  // namespace skelet
