#pragma once

#include <functional>
#include <random>
#include <string>
#include <vector>

#include "gef/nn/cvae.hpp"
#include "gef/nn/layers.hpp"
#include "gradcheck.hpp"

namespace gef::testing {

struct OpCase {
  std::string name;
  /// Builds inputs for one random point and the scalar loss over them.
  std::function<std::pair<std::vector<Tensor>, LossFn>(std::mt19937_64&)> make;
};

inline std::vector<OpCase> op_catalog() {
  using V = std::vector<Tensor>;
  using R = std::mt19937_64;
  auto rt = [](Shape s, R& r) { return random_tensor(std::move(s), r); };
  std::vector<OpCase> ops;
  auto unary = [&](std::string name, Tensor (*op)(const Tensor&)) {
    ops.push_back({name, [op, rt](R& r) {
                     return std::pair{V{rt({3, 4}, r)},
                                      LossFn([op](const V& x) { return weighted_sum(op(x[0])); })};
                   }});
  };

  ops.push_back({"matmul", [rt](R& r) {
                   return std::pair{V{rt({3, 4}, r), rt({4, 2}, r)},
                                    LossFn([](const V& x) { return weighted_sum(matmul(x[0], x[1])); })};
                 }});
  ops.push_back({"add", [rt](R& r) {
                   return std::pair{V{rt({3, 4}, r), rt({3, 4}, r)},
                                    LossFn([](const V& x) { return weighted_sum(add(x[0], x[1])); })};
                 }});
  ops.push_back({"add_row_broadcast", [rt](R& r) {
                   return std::pair{V{rt({3, 4}, r), rt({1, 4}, r)},
                                    LossFn([](const V& x) { return weighted_sum(add(x[0], x[1])); })};
                 }});
  ops.push_back({"sub", [rt](R& r) {
                   return std::pair{V{rt({3, 4}, r), rt({3, 4}, r)},
                                    LossFn([](const V& x) { return weighted_sum(sub(x[0], x[1])); })};
                 }});
  ops.push_back({"mul", [rt](R& r) {
                   return std::pair{V{rt({3, 4}, r), rt({3, 4}, r)},
                                    LossFn([](const V& x) { return weighted_sum(mul(x[0], x[1])); })};
                 }});
  ops.push_back({"scale", [rt](R& r) {
                   return std::pair{V{rt({3, 4}, r)},
                                    LossFn([](const V& x) { return weighted_sum(scale(x[0], -1.7)); })};
                 }});
  ops.push_back({"add_scalar", [rt](R& r) {
                   return std::pair{V{rt({3, 4}, r)},
                                    LossFn([](const V& x) { return weighted_sum(mul(add_scalar(x[0], 0.3), x[0])); })};
                 }});
  unary("one_minus", one_minus);
  unary("tanh", tanh);
  unary("sigmoid", sigmoid);
  unary("exp", exp);
  ops.push_back({"relu", [](R& r) {
                   return std::pair{V{away_from_zero({3, 4}, r)},
                                    LossFn([](const V& x) { return weighted_sum(relu(x[0])); })};
                 }});
  ops.push_back({"abs", [](R& r) {
                   return std::pair{V{away_from_zero({3, 4}, r)},
                                    LossFn([](const V& x) { return weighted_sum(abs(x[0])); })};
                 }});
  ops.push_back({"concat", [rt](R& r) {
                   return std::pair{V{rt({2, 3}, r), rt({2, 1}, r), rt({2, 2}, r)},
                                    LossFn([](const V& x) { return weighted_sum(concat({x[0], x[1], x[2]})); })};
                 }});
  ops.push_back({"concat_rows", [rt](R& r) {
                   return std::pair{V{rt({2, 3}, r), rt({1, 3}, r)},
                                    LossFn([](const V& x) { return weighted_sum(concat_rows(x)); })};
                 }});
  ops.push_back({"slice_cols", [rt](R& r) {
                   return std::pair{V{rt({3, 5}, r)},
                                    LossFn([](const V& x) { return weighted_sum(slice_cols(x[0], 1, 4)); })};
                 }});
  ops.push_back({"slice_rows", [rt](R& r) {
                   return std::pair{V{rt({4, 3}, r)},
                                    LossFn([](const V& x) { return weighted_sum(slice_rows(x[0], 1, 3)); })};
                 }});
  ops.push_back({"sum", [rt](R& r) {
                   return std::pair{V{rt({3, 4}, r)},
                                    LossFn([](const V& x) { return mul(sum(x[0]), sum(x[0])); })};
                 }});
  ops.push_back({"mean", [rt](R& r) {
                   return std::pair{V{rt({3, 4}, r)},
                                    LossFn([](const V& x) { return mul(mean(x[0]), sum(x[0])); })};
                 }});
  ops.push_back({"mean_rows", [rt](R& r) {
                   return std::pair{V{rt({3, 4}, r)},
                                    LossFn([](const V& x) { return weighted_sum(mean_rows(x[0])); })};
                 }});
  ops.push_back({"max_rows", [](R& r) {
                   return std::pair{V{distinct_tensor({4, 3}, r)},
                                    LossFn([](const V& x) { return weighted_sum(max_rows(x[0])); })};
                 }});
  ops.push_back({"sum_cols", [rt](R& r) {
                   return std::pair{V{rt({3, 4}, r)},
                                    LossFn([](const V& x) { return weighted_sum(sum_cols(x[0])); })};
                 }});
  unary("softmax", softmax);
  unary("log_softmax", log_softmax);
  ops.push_back({"cross_entropy_rows", [rt](R& r) {
                   return std::pair{V{rt({3, 5}, r)}, LossFn([](const V& x) {
                                      const std::vector<int> t{4, 0, 2};
                                      return weighted_sum(cross_entropy_rows(x[0], t));
                                    })};
                 }});
  ops.push_back({"cross_entropy", [rt](R& r) {
                   return std::pair{V{rt({3, 5}, r)}, LossFn([](const V& x) {
                                      const std::vector<int> t{1, 1, 3};
                                      return cross_entropy(x[0], t);
                                    })};
                 }});
  ops.push_back({"pick", [rt](R& r) {
                   return std::pair{V{rt({3, 4}, r)}, LossFn([](const V& x) {
                                      const std::vector<int> t{3, 0, 3};
                                      return weighted_sum(pick(softmax(x[0]), t));
                                    })};
                 }});
  ops.push_back({"embedding_lookup", [rt](R& r) {
                   return std::pair{V{rt({5, 3}, r)}, LossFn([](const V& x) {
                                      const std::vector<int> ids{4, 1, 4, 0};
                                      return weighted_sum(embedding_lookup(x[0], ids));
                                    })};
                 }});
  ops.push_back({"unfold_rows", [rt](R& r) {
                   return std::pair{V{rt({5, 2}, r)},
                                    LossFn([](const V& x) { return weighted_sum(unfold_rows(x[0], 3)); })};
                 }});
  ops.push_back({"select_rows", [rt](R& r) {
                   return std::pair{V{rt({4, 3}, r), rt({4, 3}, r)}, LossFn([](const V& x) {
                                      const std::vector<bool> m{true, false, false, true};
                                      return weighted_sum(select_rows(m, x[0], x[1]));
                                    })};
                 }});
  // Composite layers built on the op suite.
  ops.push_back({"gru_step", [rt](R& r) {
                   return std::pair{V{rt({2, 3}, r), rt({2, 4}, r), rt({3, 12}, r), rt({4, 12}, r)},
                                    LossFn([](const V& x) {
                                      nn::GruCell cell;
                                      cell.hidden = 4;
                                      cell.input.weight = x[2];
                                      cell.input.bias = Tensor::zeros({1, 12});
                                      cell.recurrent = x[3];
                                      return weighted_sum(cell.step(x[0], x[1]));
                                    })};
                 }});
  ops.push_back({"lstm_step", [rt](R& r) {
                   return std::pair{V{rt({2, 3}, r), rt({2, 4}, r), rt({2, 4}, r), rt({3, 16}, r),
                                      rt({4, 16}, r)},
                                    LossFn([](const V& x) {
                                      nn::LstmCell cell;
                                      cell.hidden = 4;
                                      cell.input.weight = x[3];
                                      cell.input.bias = Tensor::zeros({1, 16});
                                      cell.recurrent = x[4];
                                      const auto s = cell.step(x[0], {x[1], x[2]});
                                      return add(weighted_sum(s.h, 5), weighted_sum(s.c, 6));
                                    })};
                 }});
  return ops;
}

}  // namespace gef::testing
