// Copyright 2026 The HME Authors
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

#include "hme/data/dtw.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "hme/errors.hpp"

namespace hme {

DtwMatch dtw_match(const Vec& a, const Vec& b) {
  require(a.size() >= 1 && b.size() >= 1, "dtw: sequences must be non-empty");
  const Eigen::Index n = a.size(), m = b.size();
  constexpr double inf = std::numeric_limits<double>::infinity();
  Mat acc = Mat::Constant(n, m, inf);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      const double c = std::abs(a(i) - b(j));
      if (i == 0 && j == 0) {
        acc(i, j) = c;
        continue;
      }
      double best = inf;
      if (i > 0 && j > 0) best = acc(i - 1, j - 1);
      if (i > 0) best = std::min(best, acc(i - 1, j));
      if (j > 0) best = std::min(best, acc(i, j - 1));
      acc(i, j) = c + best;
    }
  }
  DtwMatch out;
  out.cost = acc(n - 1, m - 1);
  Eigen::Index i = n - 1, j = m - 1;
  out.path.emplace_back(i, j);
  while (i > 0 || j > 0) {
    if (i == 0) {
      --j;
    } else if (j == 0) {
      --i;
    } else {
      const double diag = acc(i - 1, j - 1), up = acc(i - 1, j), left = acc(i, j - 1);
      if (diag <= up && diag <= left) {
        --i;
        --j;
      } else if (up <= left) {
        --i;
      } else {
        --j;
      }
    }
    out.path.emplace_back(i, j);
  }
  std::reverse(out.path.begin(), out.path.end());
  return out;
}

double dtw_distance(const Vec& a, const Vec& b) { return dtw_match(a, b).cost; }

DtwAlignment dtw_align(const std::vector<Vec>& sequences) {
  require(sequences.size() >= 2, "dtw_align: at least two sequences are required");
  for (const Vec& s : sequences) require(s.size() >= 1, "dtw_align: empty sequence");
  std::vector<std::size_t> order(sequences.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    return sequences[x].size() < sequences[y].size();
  });
  DtwAlignment out;
  out.reference_index = order[(order.size() - 1) / 2];
  const Vec& ref = sequences[out.reference_index];
  out.length = ref.size();
  for (const Vec& s : sequences) {
    DtwMatch m = dtw_match(ref, s);
    Vec sum = Vec::Zero(ref.size());
    Vec count = Vec::Zero(ref.size());
    for (const auto& [i, j] : m.path) {
      sum(i) += s(j);
      count(i) += 1.0;
    }
    out.aligned.push_back(sum.cwiseQuotient(count));
    out.costs.push_back(m.cost);
    out.paths.push_back(std::move(m.path));
  }
  return out;
}

}  // namespace hme
