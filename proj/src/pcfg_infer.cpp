// Copyright 2026 The rankspace Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include "rankspace/pcfg_infer.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <stdexcept>

#include <fmt/format.h>

namespace rankspace {

namespace {

void check_sentence(TokenSeq seq, int vocab_size) {
  if (seq.size() < 2)
    throw std::invalid_argument("inside: sentences of length 1 are not supported (need n >= 2)");
  for (std::size_t t = 0; t < seq.size(); ++t)
    if (seq[t] < 0 || seq[t] >= vocab_size)
      throw std::out_of_range(fmt::format("token id {} at position {} outside vocabulary of size {}", seq[t], t,
                                          vocab_size));
}

// Symbol-space leaf score: emission for preterminals, -inf for nonterminals.
LogVec leaf_scores(int num_nt, const LogMat& emission, int word) {
  LogVec out = LogVec::Constant(num_nt + emission.rows(), kNegInf);
  out.tail(emission.rows()) = emission.col(word);
  return out;
}

// Symbol-space span score: alpha over nonterminals, -inf for preterminals.
LogVec padded_span(const LogVec& alpha_nt, int num_pt) {
  LogVec out = LogVec::Constant(alpha_nt.size() + num_pt, kNegInf);
  out.head(alpha_nt.size()) = alpha_nt;
  return out;
}

Real root_score(const LogVec& start, const LogVec& alpha) { return log_sum_exp(LogVec(start + alpha)); }

}  // namespace

bool ParseTree::contains(int i, int j) const {
  return std::find(spans.begin(), spans.end(), std::make_pair(i, j)) != spans.end();
}

InsideChart dense_inside(const DensePCFG& model, TokenSeq seq) {
  check_sentence(seq, model.vocab_size());
  const int n = static_cast<int>(seq.size());
  const int m = model.num_symbols();
  const ExpMatrix rules(model.binary);  // num_nt x (m*m)

  // Children in symbol space, scaled.
  SpanTable<ScaledVec> child(n);
  for (int i = 0; i < n; ++i) child(i, i + 1) = ScaledVec::from_log(leaf_scores(model.num_nt, model.emission, seq[i]));

  InsideChart chart;
  chart.n = n;
  chart.alpha = SpanTable<LogVec>(n);
  for (int w = 2; w <= n; ++w) {
    const int count = n - w + 1;
    // Column s holds the row-major m x m outer-product sum of span s.
    Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic> pairs =
        Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>::Zero(static_cast<Eigen::Index>(m) * m, count);
    std::vector<Real> tops(static_cast<std::size_t>(count), kNegInf);
    for (int i = 0; i < count; ++i) {
      const int j = i + w;
      Real top = kNegInf;
      for (int k = i + 1; k < j; ++k) top = std::max(top, child(i, k).log_scale + child(k, j).log_scale);
      tops[static_cast<std::size_t>(i)] = top;
      if (top == kNegInf) continue;
      Eigen::Map<Matrix> outer(pairs.col(i).data(), m, m);
      for (int k = i + 1; k < j; ++k) {
        const Real s = child(i, k).log_scale + child(k, j).log_scale;
        if (s == kNegInf) continue;
        outer.noalias() += std::exp(s - top) * child(i, k).value * child(k, j).value.transpose();
      }
    }
    const Matrix inside = rules.value() * pairs;  // num_nt x count
    for (int i = 0; i < count; ++i) {
      const int j = i + w;
      LogVec alpha(model.num_nt);
      const Real top = tops[static_cast<std::size_t>(i)];
      for (int a = 0; a < model.num_nt; ++a) {
        const Real x = inside(a, i);
        alpha[a] = (top == kNegInf || !(x > 0)) ? kNegInf : rules.row_log_scale()[a] + top + std::log(x);
      }
      child(i, j) = ScaledVec::from_log(padded_span(alpha, model.num_pt));
      chart.alpha(i, j) = std::move(alpha);
    }
  }
  chart.logZ = root_score(model.start, chart.alpha(0, n));
  return chart;
}

InsideChart td_inside(const CpdPCFG& model, TokenSeq seq) {
  check_sentence(seq, model.vocab_size());
  const int n = static_cast<int>(seq.size());
  const int nt = model.num_nt, pt = model.num_pt;
  const ExpMatrix u(model.U);                          // num_nt x r
  const ExpMatrix v_nt(LogMat(model.V.leftCols(nt)));  // r x num_nt
  const ExpMatrix w_nt(LogMat(model.W.leftCols(nt)));
  const ExpMatrix v_pt(LogMat(model.V.middleCols(nt, pt)));  // r x num_pt
  const ExpMatrix w_pt(LogMat(model.W.middleCols(nt, pt)));

  // Cached projections V.alpha and W.alpha for every span used as a child.
  SpanTable<ScaledVec> v_proj(n), w_proj(n);
  for (int i = 0; i < n; ++i) {
    const ScaledVec leaf = ScaledVec::from_log(model.E.col(seq[i]));
    v_proj(i, i + 1) = v_pt.apply(leaf);
    w_proj(i, i + 1) = w_pt.apply(leaf);
  }

  InsideChart chart;
  chart.n = n;
  chart.alpha = SpanTable<LogVec>(n);
  for (int w = 2; w <= n; ++w) {
    for (int i = 0; i + w <= n; ++i) {
      const int j = i + w;
      ScaledSum sum(model.rank());
      for (int k = i + 1; k < j; ++k) sum.add_product(v_proj(i, k), w_proj(k, j));
      const ScaledVec alpha = u.apply(sum.result());
      if (j - i < n) {
        v_proj(i, j) = v_nt.apply(alpha);
        w_proj(i, j) = w_nt.apply(alpha);
      }
      chart.alpha(i, j) = alpha.to_log();
    }
  }
  chart.logZ = root_score(model.start, chart.alpha(0, n));
  return chart;
}

InsideChart lpcfg_inside(const LpcfgView& view, const LogMat& emission, const LogVec& start, TokenSeq seq) {
  const int r = view.rank(), nt = view.num_nt();
  const int pt = static_cast<int>(emission.rows());
  const int m = nt + pt;
  if (view.Vprime.rows() != r || view.Vprime.cols() != static_cast<Eigen::Index>(m) * m)
    throw std::invalid_argument("lpcfg_inside: Vprime shape does not match U and emission");
  if (start.size() != nt) throw std::invalid_argument("lpcfg_inside: start length differs from num_nt");
  check_sentence(seq, static_cast<int>(emission.cols()));
  const int n = static_cast<int>(seq.size());

  // Rows (q, b), columns c: contracting with the right child first.
  const ExpMatrix vprime(LogMat(Eigen::Map<const LogMat>(view.Vprime.data(), static_cast<Eigen::Index>(r) * m, m)));
  const ExpMatrix u(view.U);

  SpanTable<ScaledVec> child(n);
  for (int i = 0; i < n; ++i) child(i, i + 1) = ScaledVec::from_log(leaf_scores(nt, emission, seq[i]));

  InsideChart chart;
  chart.n = n;
  chart.alpha = SpanTable<LogVec>(n);
  for (int w = 2; w <= n; ++w) {
    for (int i = 0; i + w <= n; ++i) {
      const int j = i + w;
      ScaledSum sum(r);
      for (int k = i + 1; k < j; ++k) {
        const ScaledVec& left = child(i, k);
        const ScaledVec partial = vprime.apply(child(k, j));  // (r*m)
        if (partial.log_scale == kNegInf || left.log_scale == kNegInf) continue;
        const Eigen::Map<const Matrix> x(partial.value.data(), r, m);
        sum.add(ScaledVec{partial.log_scale + left.log_scale, x * left.value});
      }
      const ScaledVec alpha = u.apply(sum.result());
      child(i, j) = ScaledVec::from_log(padded_span(alpha.to_log(), pt));
      chart.alpha(i, j) = alpha.to_log();
    }
  }
  chart.logZ = root_score(start, chart.alpha(0, n));
  return chart;
}

namespace detail {

RankChart rank_inside_scaled(const RankPCFG& model, TokenSeq seq) {
  check_sentence(seq, model.vocab_size());
  const int n = static_cast<int>(seq.size());
  RankChart chart;
  chart.n = n;
  chart.alpha = SpanTable<ScaledVec>(n);
  chart.left = SpanTable<ScaledVec>(n);
  chart.right = SpanTable<ScaledVec>(n);
  // A word serves as a left child through V (J) and as a right child through W (K).
  for (int i = 0; i < n; ++i) {
    chart.left(i, i + 1) = ScaledVec::from_log(model.J().col(seq[i]));
    chart.right(i, i + 1) = ScaledVec::from_log(model.K().col(seq[i]));
  }
  for (int w = 2; w <= n; ++w) {
    for (int i = 0; i + w <= n; ++i) {
      const int j = i + w;
      ScaledSum sum(model.rank());
      for (int k = i + 1; k < j; ++k) sum.add_product(chart.left(i, k), chart.right(k, j));
      chart.alpha(i, j) = sum.result();
      if (w < n) {
        chart.left(i, j) = model.exp_H().apply(chart.alpha(i, j));
        chart.right(i, j) = model.exp_I().apply(chart.alpha(i, j));
      }
    }
  }
  chart.logZ = root_score(model.L(), chart.alpha(0, n).to_log());
  return chart;
}

SpanMarginals rank_inside_adjoint(const RankPCFG& model, TokenSeq seq, const RankChart& chart, RankPcfgGrad* grad) {
  const int n = chart.n;
  const int r = model.rank();
  if (chart.logZ == kNegInf) throw std::runtime_error("zero-probability sentence");
  // outside(i, j) = d logZ / d alpha(i, j), and likewise for the left/right caches.
  SpanTable<ScaledVec> outside(n), out_left(n), out_right(n);
  SpanMarginals marginals;
  marginals.n = n;
  marginals.mu = SpanTable<double>(n, 0.0);

  outside(0, n) = ScaledVec::from_log(LogVec(model.L().array() - chart.logZ));
  for (int w = n; w >= 1; --w) {
    for (int i = 0; i + w <= n; ++i) {
      const int j = i + w;
      if (w < n) {
        ScaledSum as_left(r), as_right(r);
        for (int parent_end = j + 1; parent_end <= n; ++parent_end)
          as_left.add_product(outside(i, parent_end), chart.right(j, parent_end));
        for (int parent_begin = 0; parent_begin < i; ++parent_begin)
          as_right.add_product(outside(parent_begin, j), chart.left(parent_begin, i));
        out_left(i, j) = as_left.result();
        out_right(i, j) = as_right.result();
        if (w >= 2) {
          ScaledSum total(r);
          total.add(model.exp_H().apply_transpose(out_left(i, j)));
          total.add(model.exp_I().apply_transpose(out_right(i, j)));
          outside(i, j) = total.result();
        }
        if (grad) {
          const ScaledVec& ol = out_left(i, j);
          const ScaledVec& orr = out_right(i, j);
          if (w >= 2) {
            const ScaledVec& a = chart.alpha(i, j);
            if (ol.log_scale + a.log_scale > kNegInf)
              grad->H.noalias() += std::exp(ol.log_scale + a.log_scale) * ol.value * a.value.transpose();
            if (orr.log_scale + a.log_scale > kNegInf)
              grad->I.noalias() += std::exp(orr.log_scale + a.log_scale) * orr.value * a.value.transpose();
          } else {
            if (ol.log_scale > kNegInf) grad->J.col(seq[i]) += std::exp(ol.log_scale) * ol.value;
            if (orr.log_scale > kNegInf) grad->K.col(seq[i]) += std::exp(orr.log_scale) * orr.value;
          }
        }
      }
      if (w >= 2) {
        const ScaledVec& a = chart.alpha(i, j);
        const ScaledVec& o = outside(i, j);
        const Real s = a.log_scale + o.log_scale;
        marginals.mu(i, j) = s == kNegInf ? 0.0 : static_cast<double>(std::exp(s) * a.value.dot(o.value));
      }
    }
  }
  if (grad) {
    const ScaledVec& root = chart.alpha(0, n);
    if (root.log_scale > kNegInf) grad->L += std::exp(root.log_scale - chart.logZ) * root.value;
  }
  return marginals;
}

}  // namespace detail

InsideChart rank_inside(const RankPCFG& model, TokenSeq seq) {
  const detail::RankChart scaled = detail::rank_inside_scaled(model, seq);
  const int n = scaled.n;
  InsideChart chart;
  chart.n = n;
  chart.alpha = SpanTable<LogVec>(n);
  chart.alphaL = SpanTable<LogVec>(n);
  chart.alphaR = SpanTable<LogVec>(n);
  for (int w = 1; w <= n; ++w)
    for (int i = 0; i + w <= n; ++i) {
      const int j = i + w;
      if (w >= 2) chart.alpha(i, j) = scaled.alpha(i, j).to_log();
      if (w < n) {
        chart.alphaL(i, j) = scaled.left(i, j).to_log();
        chart.alphaR(i, j) = scaled.right(i, j).to_log();
      }
    }
  chart.logZ = scaled.logZ;
  return chart;
}

SpanMarginals span_marginals(const RankPCFG& model, TokenSeq seq) {
  const detail::RankChart chart = detail::rank_inside_scaled(model, seq);
  return detail::rank_inside_adjoint(model, seq, chart, nullptr);
}

ParseTree mbr_decode(const SpanMarginals& marginals) {
  const int n = marginals.n;
  ParseTree tree;
  tree.n = n;
  if (n < 2) return tree;
  SpanTable<double> best(n, 0.0);
  SpanTable<int> split(n, -1);
  for (int w = 2; w <= n; ++w)
    for (int i = 0; i + w <= n; ++i) {
      const int j = i + w;
      double top = -std::numeric_limits<double>::infinity();
      int arg = -1;
      for (int k = i + 1; k < j; ++k) {
        const double v = best(i, k) + best(k, j);
        if (v > top) {
          top = v;
          arg = k;
        }
      }
      best(i, j) = marginals(i, j) + top;
      split(i, j) = arg;
    }
  std::vector<std::pair<int, int>> stack{{0, n}};
  while (!stack.empty()) {
    const auto [i, j] = stack.back();
    stack.pop_back();
    if (j - i < 2) continue;
    tree.spans.emplace_back(i, j);
    const int k = split(i, j);
    stack.emplace_back(k, j);
    stack.emplace_back(i, k);
  }
  return tree;
}

double expected_spans(const SpanMarginals& marginals, const ParseTree& tree) {
  double total = 0;
  for (const auto& [i, j] : tree.spans) total += marginals(i, j);
  return total;
}

std::string to_brackets(const ParseTree& tree) {
  if (tree.n < 1) return "";
  std::function<std::string(int, int)> render = [&](int i, int j) -> std::string {
    if (j - i == 1) return std::to_string(i);
    // Left child: the widest recorded span starting at i and ending before j.
    int k = i + 1;
    for (const auto& [a, b] : tree.spans)
      if (a == i && b < j) k = std::max(k, b);
    return "(" + render(i, k) + " " + render(k, j) + ")";
  };
  return render(0, tree.n);
}

ParseTree parse_brackets(const std::string& text) {
  std::size_t pos = 0;
  int next_leaf = 0;
  ParseTree tree;
  auto skip_ws = [&] {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  };
  // Returns the [begin, end) leaf range of the parsed node.
  std::function<std::pair<int, int>()> node = [&]() -> std::pair<int, int> {
    skip_ws();
    if (pos >= text.size()) throw std::invalid_argument("brackets: unexpected end of input");
    if (text[pos] == '(') {
      ++pos;
      const std::size_t slot = tree.spans.size();
      tree.spans.emplace_back(-1, -1);
      const auto left = node();
      const auto right = node();
      skip_ws();
      if (pos >= text.size() || text[pos] != ')')
        throw std::invalid_argument("brackets: every constituent must have exactly two children");
      ++pos;
      tree.spans[slot] = {left.first, right.second};
      return {left.first, right.second};
    }
    std::size_t end = pos;
    while (end < text.size() && std::isdigit(static_cast<unsigned char>(text[end]))) ++end;
    if (end == pos) throw std::invalid_argument(fmt::format("brackets: unexpected character '{}'", text[pos]));
    const int leaf = std::stoi(text.substr(pos, end - pos));
    if (leaf != next_leaf)
      throw std::invalid_argument(fmt::format("brackets: expected leaf {}, found {}", next_leaf, leaf));
    ++next_leaf;
    pos = end;
    return {leaf, leaf + 1};
  };
  const auto root = node();
  skip_ws();
  if (pos != text.size()) throw std::invalid_argument("brackets: trailing characters");
  tree.n = root.second;
  return tree;
}

double sentence_f1(const ParseTree& predicted, const ParseTree& gold) {
  if (predicted.n != gold.n)
    throw std::invalid_argument(fmt::format("sentence length mismatch: {} vs {}", predicted.n, gold.n));
  auto nontrivial = [](const ParseTree& t) {
    std::vector<std::pair<int, int>> out;
    for (const auto& s : t.spans)
      if (s.second - s.first >= 2 && !(s.first == 0 && s.second == t.n)) out.push_back(s);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  };
  const auto p = nontrivial(predicted), g = nontrivial(gold);
  if (p.empty() && g.empty()) return 100.0;
  std::vector<std::pair<int, int>> both;
  std::set_intersection(p.begin(), p.end(), g.begin(), g.end(), std::back_inserter(both));
  if (both.empty()) return 0.0;
  const double precision = static_cast<double>(both.size()) / static_cast<double>(p.size());
  const double recall = static_cast<double>(both.size()) / static_cast<double>(g.size());
  return 100.0 * 2 * precision * recall / (precision + recall);
}

std::vector<ParseTree> parse_corpus(const RankPCFG& model, const std::vector<std::vector<int>>& corpus) {
  std::vector<ParseTree> out;
  out.reserve(corpus.size());
  for (const auto& s : corpus) out.push_back(mbr_decode(span_marginals(model, s)));
  return out;
}

double corpus_sentence_f1(const std::vector<ParseTree>& predicted, const std::vector<ParseTree>& gold) {
  if (predicted.size() != gold.size())
    throw std::invalid_argument(
        fmt::format("gold has {} sentences, predictions have {}", gold.size(), predicted.size()));
  if (predicted.empty()) throw std::invalid_argument("corpus_sentence_f1: empty corpus");
  double total = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) total += sentence_f1(predicted[i], gold[i]);
  return total / static_cast<double>(predicted.size());
}

}  // namespace rankspace
