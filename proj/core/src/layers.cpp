#include "gef/nn/layers.hpp"

#include <algorithm>
#include <cmath>

namespace gef::nn {

Linear::Linear(std::size_t in, std::size_t out, Rng& rng, bool zero_init) {
  weight = zero_init ? zero_param({in, out}) : uniform_param({in, out}, xavier_bound(in, out), rng);
  bias = zero_param({1, out});
}

void Linear::collect(const std::string& prefix, ParameterList& out) const {
  out.push_back({prefix + ".weight", weight});
  out.push_back({prefix + ".bias", bias});
}

Embedding::Embedding(std::size_t vocab, std::size_t dim, Rng& rng)
    : table(uniform_param({vocab, dim}, std::sqrt(3.0 / static_cast<double>(dim)), rng)) {}

void Embedding::collect(const std::string& prefix, ParameterList& out) const {
  out.push_back({prefix + ".table", table});
}

GruCell::GruCell(std::size_t in, std::size_t h, Rng& rng)
    : input(in, 3 * h, rng), recurrent(uniform_param({h, 3 * h}, xavier_bound(h, h), rng)),
      hidden(h) {}

Tensor GruCell::step(const Tensor& x, const Tensor& h) const {
  const Tensor gx = input(x);
  const Tensor gh = matmul(h, recurrent);
  const std::size_t n = hidden;
  const Tensor r = sigmoid(add(slice_cols(gx, 0, n), slice_cols(gh, 0, n)));
  const Tensor z = sigmoid(add(slice_cols(gx, n, 2 * n), slice_cols(gh, n, 2 * n)));
  const Tensor cand = tanh(add(slice_cols(gx, 2 * n, 3 * n), mul(r, slice_cols(gh, 2 * n, 3 * n))));
  return add(mul(one_minus(z), cand), mul(z, h));
}

void GruCell::collect(const std::string& prefix, ParameterList& out) const {
  input.collect(prefix + ".input", out);
  out.push_back({prefix + ".recurrent", recurrent});
}

LstmCell::LstmCell(std::size_t in, std::size_t h, Rng& rng)
    : input(in, 4 * h, rng), recurrent(uniform_param({h, 4 * h}, xavier_bound(h, h), rng)),
      hidden(h) {
  // forget-gate bias starts at 1
  auto b = input.bias.mutable_values();
  std::fill(b.begin() + static_cast<std::ptrdiff_t>(h), b.begin() + static_cast<std::ptrdiff_t>(2 * h),
            1.0);
}

LstmState LstmCell::step(const Tensor& x, const LstmState& s) const {
  const Tensor gates = add(input(x), matmul(s.h, recurrent));
  const std::size_t n = hidden;
  const Tensor i = sigmoid(slice_cols(gates, 0, n));
  const Tensor f = sigmoid(slice_cols(gates, n, 2 * n));
  const Tensor g = tanh(slice_cols(gates, 2 * n, 3 * n));
  const Tensor o = sigmoid(slice_cols(gates, 3 * n, 4 * n));
  const Tensor c = add(mul(f, s.c), mul(i, g));
  return {mul(o, tanh(c)), c};
}

void LstmCell::collect(const std::string& prefix, ParameterList& out) const {
  input.collect(prefix + ".input", out);
  out.push_back({prefix + ".recurrent", recurrent});
}

TimeMajor time_major(std::span<const Ids> seqs, bool reverse) {
  TimeMajor tm;
  std::size_t max_len = 0;
  for (const auto& s : seqs) {
    tm.lengths.push_back(s.size());
    max_len = std::max(max_len, s.size());
  }
  tm.ids.assign(max_len, Ids(seqs.size(), text::Vocab::kPad));
  tm.mask.assign(max_len, std::vector<bool>(seqs.size(), false));
  for (std::size_t b = 0; b < seqs.size(); ++b) {
    const auto& s = seqs[b];
    for (std::size_t t = 0; t < s.size(); ++t) {
      tm.ids[t][b] = reverse ? s[s.size() - 1 - t] : s[t];
      tm.mask[t][b] = true;
    }
  }
  return tm;
}

std::vector<Tensor> embed_steps(const Embedding& emb, const TimeMajor& tm) {
  std::vector<Tensor> out;
  out.reserve(tm.steps());
  for (const auto& ids : tm.ids) out.push_back(emb(ids));
  return out;
}

Tensor run_gru(const GruCell& cell, const std::vector<Tensor>& inputs,
               const std::vector<std::vector<bool>>& masks, std::size_t batch, const Tensor& h0) {
  Tensor h = h0.defined() ? h0 : Tensor::zeros({batch, cell.hidden});
  for (std::size_t t = 0; t < inputs.size(); ++t) {
    const Tensor next = cell.step(inputs[t], h);
    const bool all = std::all_of(masks[t].begin(), masks[t].end(), [](bool m) { return m; });
    h = all ? next : select_rows(masks[t], next, h);
  }
  return h;
}

}  // namespace gef::nn
