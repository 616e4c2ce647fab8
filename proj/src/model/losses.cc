// Copyright 2026 The StepAlign Authors.
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

#include "stepalign/model/losses.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "stepalign/error.h"
#include "stepalign/features/vector_ops.h"
#include "stepalign/simd/kernels.h"

namespace stepalign {

namespace {

// log sum_{i : mask[i]} exp(z[i])
double masked_lse(const std::vector<double>& z, const std::vector<char>& mask) {
  double mx = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (mask[i]) mx = std::max(mx, z[i]);
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (mask[i]) sum += std::exp(z[i] - mx);
  }
  return mx + std::log(sum);
}

std::vector<double> row_mean(const Matrix& m) {
  std::vector<double> out(m.cols(), 0.0);
  for (std::size_t r = 0; r < m.rows(); ++r) simd::add(m.row(r), out);
  simd::scale(1.0 / static_cast<double>(m.rows()), out);
  return out;
}

}  // namespace

double cosine_with_grad(std::span<const double> u, std::span<const double> v, double upstream,
                        std::span<double> grad_u, std::span<double> grad_v) {
  const double nu = norm(u), nv = norm(v);
  if (nu == 0.0 || nv == 0.0) throw ValidationError("cosine: zero vector");
  const double c = simd::dot(u, v) / (nu * nv);
  if (upstream != 0.0) {
    if (!grad_u.empty()) {
      simd::axpy(upstream / (nu * nv), v, grad_u);
      simd::axpy(-upstream * c / (nu * nu), u, grad_u);
    }
    if (!grad_v.empty()) {
      simd::axpy(upstream / (nu * nv), u, grad_v);
      simd::axpy(-upstream * c / (nv * nv), v, grad_v);
    }
  }
  return c;
}

double loss_supervised(std::span<const double> slot, std::span<const Segment> positives,
                       const Matrix& frames, double gamma, std::span<double> grad_slot,
                       Matrix* grad_frames) {
  if (!(gamma > 0.0)) throw ValidationError("loss_supervised: gamma must be > 0");
  if (slot.size() != frames.cols()) throw ValidationError("loss_supervised: dimension mismatch");
  const std::size_t L = frames.rows();
  std::vector<char> in_seg(L, 0), all(L, 1);
  bool any = false;
  for (const Segment& s : positives) {
    if (s.end <= s.start) throw ValidationError("loss_supervised: segment empty");
    if (s.start < 0 || static_cast<std::size_t>(s.end) > L) {
      throw ValidationError("loss_supervised: segment outside the video");
    }
    for (int j = s.start; j < s.end; ++j) in_seg[j] = 1;
    any = true;
  }
  if (!any) throw ValidationError("loss_supervised: segment empty");

  std::vector<double> z(L);
  for (std::size_t j = 0; j < L; ++j) z[j] = cosine_with_grad(slot, frames.row(j), 0.0, {}, {}) / gamma;
  const double lse_all = masked_lse(z, all);
  const double lse_pos = masked_lse(z, in_seg);
  const double loss = std::max(0.0, lse_all - lse_pos);

  if (!grad_slot.empty() || grad_frames != nullptr) {
    for (std::size_t j = 0; j < L; ++j) {
      // d loss / d z_j = softmax_all(j) - softmax_pos(j)
      double g = std::exp(z[j] - lse_all);
      if (in_seg[j]) g -= std::exp(z[j] - lse_pos);
      if (g == 0.0) continue;
      cosine_with_grad(slot, frames.row(j), g / gamma, grad_slot,
                       grad_frames ? grad_frames->row(j) : std::span<double>());
    }
  }
  return loss;
}

double loss_supervised(std::span<const double> slot, const Segment& segment,
                       const Matrix& frames, double gamma) {
  return loss_supervised(slot, std::span<const Segment>(&segment, 1), frames, gamma);
}

double loss_global(std::span<const Matrix> selected_slots, std::span<const Matrix> texts,
                   double gamma, std::vector<Matrix>* grad_slots,
                   std::vector<Matrix>* grad_texts) {
  const std::size_t B = selected_slots.size();
  if (B < 2) throw ValidationError("loss_global: needs a batch of at least 2 videos");
  if (texts.size() != B) throw ValidationError("loss_global: slot/text batch size mismatch");
  if (!(gamma > 0.0)) throw ValidationError("loss_global: gamma must be > 0");

  std::vector<std::vector<double>> s(B), t(B);
  for (std::size_t b = 0; b < B; ++b) {
    if (selected_slots[b].rows() == 0 || texts[b].rows() == 0) {
      throw ValidationError("loss_global: video without steps");
    }
    s[b] = row_mean(selected_slots[b]);
    t[b] = row_mean(texts[b]);
  }
  Matrix c(B, B);
  for (std::size_t v = 0; v < B; ++v) {
    for (std::size_t w = 0; w < B; ++w) c(v, w) = cosine_with_grad(s[v], t[w], 0.0, {}, {}) / gamma;
  }
  const Matrix rows = [&] {
    Matrix z(B, B);
    for (std::size_t v = 0; v < B; ++v) {
      double mx = c(v, 0);
      for (std::size_t w = 1; w < B; ++w) mx = std::max(mx, c(v, w));
      double sum = 0.0;
      for (std::size_t w = 0; w < B; ++w) sum += std::exp(c(v, w) - mx);
      for (std::size_t w = 0; w < B; ++w) z(v, w) = c(v, w) - mx - std::log(sum);
    }
    return z;
  }();
  const Matrix cols = [&] {
    Matrix z(B, B);
    for (std::size_t w = 0; w < B; ++w) {
      double mx = c(0, w);
      for (std::size_t v = 1; v < B; ++v) mx = std::max(mx, c(v, w));
      double sum = 0.0;
      for (std::size_t v = 0; v < B; ++v) sum += std::exp(c(v, w) - mx);
      for (std::size_t v = 0; v < B; ++v) z(v, w) = c(v, w) - mx - std::log(sum);
    }
    return z;
  }();  // log-softmax over v for each column w
  double loss = 0.0;
  for (std::size_t b = 0; b < B; ++b) loss -= rows(b, b) + cols(b, b);
  loss /= 2.0 * static_cast<double>(B);
  loss = std::max(0.0, loss);

  if (grad_slots == nullptr && grad_texts == nullptr) return loss;
  std::vector<std::vector<double>> gs(B, std::vector<double>(s[0].size(), 0.0));
  std::vector<std::vector<double>> gt(B, std::vector<double>(t[0].size(), 0.0));
  const double scale = 1.0 / (2.0 * static_cast<double>(B) * gamma);
  for (std::size_t v = 0; v < B; ++v) {
    for (std::size_t w = 0; w < B; ++w) {
      const double delta = v == w ? 1.0 : 0.0;
      const double g = scale * (std::exp(rows(v, w)) + std::exp(cols(v, w)) - 2.0 * delta);
      cosine_with_grad(s[v], t[w], g, gs[v], gt[w]);
    }
  }
  for (std::size_t b = 0; b < B; ++b) {
    if (grad_slots != nullptr) {
      Matrix& g = (*grad_slots)[b];
      const double inv = 1.0 / static_cast<double>(g.rows());
      for (std::size_t r = 0; r < g.rows(); ++r) simd::axpy(inv, gs[b], g.row(r));
    }
    if (grad_texts != nullptr) {
      Matrix& g = (*grad_texts)[b];
      const double inv = 1.0 / static_cast<double>(g.rows());
      for (std::size_t r = 0; r < g.rows(); ++r) simd::axpy(inv, gt[b], g.row(r));
    }
  }
  return loss;
}

}  // namespace stepalign
