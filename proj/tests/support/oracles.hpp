// SPDX-License-Identifier: Apache-2.0
//
// Independent reference computations used only by tests. Nothing here calls
// into the code paths it is used to check.
#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include <gmpxx.h>

#include "eegcrypt/data.hpp"
#include "eegcrypt/network.hpp"
#include "eegcrypt/quantized.hpp"

namespace oracles {

/// Plain integer forward pass of a quantized model on level-1 signed inputs.
inline std::vector<mpz_class> quantized_forward(const eegcrypt::encinfer::QuantizedModel& m,
                                                const std::vector<mpz_class>& x) {
  std::vector<mpz_class> act(m.n_d);
  for (std::size_t j = 0; j < m.n_d; ++j) {
    mpz_class h = m.b1[j];
    for (std::size_t i = 0; i < m.n_i; ++i) h += m.W1[i * m.n_d + j] * x[i];
    act[j] = m.act_slope * h + m.act_intercept;
  }
  std::vector<mpz_class> z(m.n_o);
  for (std::size_t k = 0; k < m.n_o; ++k) {
    z[k] = m.b2[k];
    for (std::size_t j = 0; j < m.n_d; ++j) z[k] += m.W2[j * m.n_o + k] * act[j];
  }
  return z;
}

/// round-half-away-from-zero(x * 2^bits) as a signed integer.
inline mpz_class scale_round(double x, unsigned bits) {
  mpz_class scaled(std::round(std::ldexp(x, static_cast<int>(bits))));
  return scaled;
}

inline double to_double(const mpz_class& s, unsigned bits) {
  mpq_class q(s, mpz_class(1) << bits);
  return q.get_d();
}

/// Real-valued forward pass using the dequantized weights and constants.
inline std::vector<double> dequantized_forward(const eegcrypt::encinfer::QuantizedModel& m,
                                               std::span<const double> x) {
  const unsigned f = m.frac_bits;
  const double slope = to_double(m.act_slope, f);
  const double intercept = to_double(m.act_intercept, 3 * f);
  std::vector<double> act(m.n_d);
  for (std::size_t j = 0; j < m.n_d; ++j) {
    double h = to_double(m.b1[j], 2 * f);
    for (std::size_t i = 0; i < m.n_i; ++i) h += to_double(m.W1[i * m.n_d + j], f) * x[i];
    act[j] = slope * h + intercept;
  }
  std::vector<double> z(m.n_o);
  for (std::size_t k = 0; k < m.n_o; ++k) {
    z[k] = to_double(m.b2[k], 4 * f);
    for (std::size_t j = 0; j < m.n_d; ++j) z[k] += to_double(m.W2[j * m.n_o + k], f) * act[j];
  }
  return z;
}

/// Textbook two-pass Pearson correlation.
inline double pearson_two_pass(std::span<const double> x, std::span<const double> y) {
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

/// Mean cross-entropy of a network on the given rows, written out longhand.
inline double batch_loss(const eegcrypt::network::NetworkModel& m, const eegcrypt::data::Dataset& ds,
                         std::span<const std::size_t> rows) {
  using eegcrypt::network::Activation;
  double total = 0.0;
  for (std::size_t r : rows) {
    std::vector<double> a(m.n_d);
    for (std::size_t j = 0; j < m.n_d; ++j) {
      double h = m.b1[j];
      for (std::size_t i = 0; i < m.n_i; ++i) h += m.W1(i, j) * ds.features(r, i);
      a[j] = m.activation == Activation::sigmoid ? 1.0 / (1.0 + std::exp(-h)) : 0.238 * h + 0.5;
    }
    std::vector<double> z(m.n_o);
    double denom = 0.0;
    for (std::size_t k = 0; k < m.n_o; ++k) {
      z[k] = m.b2[k];
      for (std::size_t j = 0; j < m.n_d; ++j) z[k] += m.W2(j, k) * a[j];
      denom += std::exp(z[k]);
    }
    total += -std::log(std::exp(z[static_cast<std::size_t>(ds.labels[r] - 1)]) / denom);
  }
  return total / static_cast<double>(rows.size());
}

/// Central finite differences of batch_loss with respect to every parameter,
/// in the order W1, b1, W2, b2.
inline std::vector<double> finite_difference_gradient(eegcrypt::network::NetworkModel m,
                                                      const eegcrypt::data::Dataset& ds,
                                                      std::span<const std::size_t> rows,
                                                      double step = 1e-5) {
  std::vector<double> out;
  for (std::vector<double>* block : {&m.W1.data, &m.b1, &m.W2.data, &m.b2}) {
    for (double& w : *block) {
      const double saved = w;
      w = saved + step;
      const double up = batch_loss(m, ds, rows);
      w = saved - step;
      const double down = batch_loss(m, ds, rows);
      w = saved;
      out.push_back((up - down) / (2.0 * step));
    }
  }
  return out;
}

}  // namespace oracles
