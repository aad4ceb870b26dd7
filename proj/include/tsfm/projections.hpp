#pragma once

#include <random>
#include <vector>

#include "tsfm/patching.hpp"
#include "tsfm/tensor.hpp"

namespace tsfm {

// Raw parameter slots per forecast element: 4 mixture logits,
// student-t (df, loc, scale), log-normal (loc, scale),
// negative binomial (count, prob logit), fixed-variance normal mean.
constexpr int kMixtureRawParams = 12;
// Ablated head predicting a single student-t component.
constexpr int kStudentTRawParams = 3;

// One input and one output projection per patch size, shared across all
// frequencies that admit the size. Weight buffers are allocated at the
// largest patch size; the leading rows/columns are the active map.
struct ProjectionBank {
  int d_model = 0;
  int n_dist_params = kMixtureRawParams;
  std::vector<ad::Tensor> in_weight;   // per slot: [max_patch x d_model]
  std::vector<ad::Tensor> out_weight;  // per slot: [d_model x max_patch*n_dist_params]
  ad::Tensor mask_embedding;           // [1 x d_model]

  static ProjectionBank init(int d_model, int n_dist_params,
                             std::mt19937_64& rng);

  std::size_t slot_for(int patch_size) const;

  // active P -> d_model map
  ad::Tensor in_map(int patch_size) const;
  // active d_model -> P*n_dist_params map
  ad::Tensor out_map(int patch_size) const;
};

// Patch embeddings for one flattened sample; masked tokens are replaced
// entirely by the mask embedding.
ad::Tensor embed(const FlattenedTokens& tokens, const ProjectionBank& bank);

// Raw (unconstrained) distribution parameters, [num_tokens x P*n_dist_params];
// element-major layout is (patch element, parameter).
ad::Tensor project_out(const ad::Tensor& encoded, const ProjectionBank& bank,
                       int patch_size);

}  // namespace tsfm
