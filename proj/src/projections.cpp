#include "tsfm/projections.hpp"

#include <algorithm>

#include "tsfm/errors.hpp"

namespace tsfm {

namespace {

std::vector<double> normal_vec(std::mt19937_64& rng, std::size_t n,
                               double stddev) {
  std::normal_distribution<double> d(0.0, stddev);
  std::vector<double> v(n);
  for (double& x : v) x = d(rng);
  return v;
}

}  // namespace

ProjectionBank ProjectionBank::init(int d_model, int n_dist_params,
                                    std::mt19937_64& rng) {
  ProjectionBank bank;
  bank.d_model = d_model;
  bank.n_dist_params = n_dist_params;
  const std::size_t d = static_cast<std::size_t>(d_model);
  const std::size_t pmax = static_cast<std::size_t>(all_patch_sizes().back());
  for (int p : all_patch_sizes()) {
    bank.in_weight.push_back(ad::Tensor::param(
        {pmax, d}, normal_vec(rng, pmax * d, std::sqrt(1.0 / p))));
    const std::size_t cols = pmax * static_cast<std::size_t>(n_dist_params);
    bank.out_weight.push_back(
        ad::Tensor::param({d, cols}, normal_vec(rng, d * cols, 1e-3)));
  }
  bank.mask_embedding =
      ad::Tensor::param({1, d}, normal_vec(rng, d, 0.02));
  return bank;
}

std::size_t ProjectionBank::slot_for(int patch_size) const {
  const auto& sizes = all_patch_sizes();
  const auto it = std::find(sizes.begin(), sizes.end(), patch_size);
  if (it == sizes.end() || in_weight.size() != sizes.size())
    throw ConfigError("projection bank has no weights for patch size " +
                      std::to_string(patch_size));
  return static_cast<std::size_t>(it - sizes.begin());
}

ad::Tensor ProjectionBank::in_map(int patch_size) const {
  const std::size_t slot = slot_for(patch_size);
  return ad::slice(in_weight[slot], 0, 0, static_cast<std::size_t>(patch_size));
}

ad::Tensor ProjectionBank::out_map(int patch_size) const {
  const std::size_t slot = slot_for(patch_size);
  const std::size_t cols =
      static_cast<std::size_t>(patch_size) * static_cast<std::size_t>(n_dist_params);
  return ad::slice(out_weight[slot], 1, 0, cols);
}

ad::Tensor embed(const FlattenedTokens& tokens, const ProjectionBank& bank) {
  const std::size_t t = tokens.num_tokens();
  const std::size_t p = static_cast<std::size_t>(tokens.patch_size);
  const std::size_t d = static_cast<std::size_t>(bank.d_model);

  std::vector<std::size_t> plain;
  std::vector<double> mask_col(t, 0.0);
  for (std::size_t i = 0; i < t; ++i) {
    if (tokens.is_mask[i])
      mask_col[i] = 1.0;
    else
      plain.push_back(i);
  }

  ad::Tensor out = ad::matmul(ad::Tensor::constant({t, 1}, std::move(mask_col)),
                              bank.mask_embedding);
  if (!plain.empty()) {
    std::vector<double> vals(plain.size() * p);
    for (std::size_t i = 0; i < plain.size(); ++i)
      std::copy_n(tokens.patches.data() + plain[i] * p, p, vals.data() + i * p);
    ad::Tensor projected = ad::matmul(
        ad::Tensor::constant({plain.size(), p}, std::move(vals)),
        bank.in_map(tokens.patch_size));
    out = ad::add(out, ad::scatter_rows(plain, projected, t));
  }
  (void)d;
  return out;
}

ad::Tensor project_out(const ad::Tensor& encoded, const ProjectionBank& bank,
                       int patch_size) {
  if (encoded.shape().size() != 2 ||
      encoded.shape()[1] != static_cast<std::size_t>(bank.d_model))
    throw ContractError("project_out: expected [tokens x " +
                        std::to_string(bank.d_model) + "], got " +
                        ad::shape_str(encoded.shape()));
  return ad::matmul(encoded, bank.out_map(patch_size));
}

}  // namespace tsfm
