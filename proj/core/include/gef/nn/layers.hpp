#pragma once

#include <span>
#include <string>
#include <vector>

#include "gef/params.hpp"
#include "gef/tensor.hpp"
#include "gef/text/vocab.hpp"

namespace gef::nn {

using text::Ids;

/// y = x W + b with W [in x out] and b [1 x out].
struct Linear {
  Tensor weight;
  Tensor bias;

  Linear() = default;
  Linear(std::size_t in, std::size_t out, Rng& rng, bool zero_init = false);

  Tensor operator()(const Tensor& x) const { return add(matmul(x, weight), bias); }
  std::size_t in_dim() const { return weight.rows(); }
  std::size_t out_dim() const { return weight.cols(); }
  void collect(const std::string& prefix, ParameterList& out) const;
};

struct Embedding {
  Tensor table;  // [vocab x dim]

  Embedding() = default;
  Embedding(std::size_t vocab, std::size_t dim, Rng& rng);

  Tensor operator()(std::span<const int> ids) const { return embedding_lookup(table, ids); }
  std::size_t dim() const { return table.cols(); }
  void collect(const std::string& prefix, ParameterList& out) const;
};

/// Gated recurrent unit; the reset gate scales the hidden projection.
struct GruCell {
  Linear input;  // in -> 3h (reset, update, candidate)
  Tensor recurrent;  // [h x 3h]
  std::size_t hidden = 0;

  GruCell() = default;
  GruCell(std::size_t in, std::size_t hidden, Rng& rng);

  Tensor step(const Tensor& x, const Tensor& h) const;
  void collect(const std::string& prefix, ParameterList& out) const;
};

struct LstmState {
  Tensor h;
  Tensor c;
};

struct LstmCell {
  Linear input;  // in -> 4h (input, forget, cell, output)
  Tensor recurrent;  // [h x 4h]
  std::size_t hidden = 0;

  LstmCell() = default;
  LstmCell(std::size_t in, std::size_t hidden, Rng& rng);

  LstmState step(const Tensor& x, const LstmState& s) const;
  void collect(const std::string& prefix, ParameterList& out) const;
};

/// A batch of variable-length id sequences laid out time-major. Finished
/// rows carry the PAD id and a false mask.
struct TimeMajor {
  std::vector<Ids> ids;                // [T][b]
  std::vector<std::vector<bool>> mask;  // [T][b]
  std::vector<std::size_t> lengths;    // [b]

  std::size_t steps() const { return ids.size(); }
  std::size_t batch() const { return lengths.size(); }
};

/// Time-major view of `seqs`; `reverse` reads each sequence back to front.
TimeMajor time_major(std::span<const Ids> seqs, bool reverse = false);

/// Final hidden state of a GRU run over embedded `steps` (masked rows keep
/// their previous state). `h0` may be undefined for a zero start.
Tensor run_gru(const GruCell& cell, const std::vector<Tensor>& inputs,
               const std::vector<std::vector<bool>>& masks, std::size_t batch,
               const Tensor& h0 = {});

/// Embeds every step of `tm`.
std::vector<Tensor> embed_steps(const Embedding& emb, const TimeMajor& tm);

}  // namespace gef::nn
