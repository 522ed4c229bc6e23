// Copyright 2026 The INSTA-Kernels Authors.
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

#include "insta/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace insta {

namespace {

void check_eps(double eps) {
  if (!(eps >= 1e-7 && eps <= 1e-4)) throw std::invalid_argument("grad_check: eps must lie in [1e-7, 1e-4]");
}

double finite_scalar(const Var& v, std::size_t coordinate) {
  if (v.size() != 1) throw ShapeError("grad_check: function must return a single element");
  const double value = v.value()[0];
  if (!std::isfinite(value)) throw NumericError("grad_check: non-finite function value", coordinate);
  return value;
}

double compare(const Tensor& analytic, std::size_t i, double plus, double minus, double eps) {
  const double numeric = (plus - minus) / (2.0 * eps);
  const double a = analytic[i];
  if (!std::isfinite(a)) throw NumericError("grad_check: non-finite analytic gradient", i);
  return std::abs(a - numeric) / std::max(1.0, std::abs(a));
}

}  // namespace

double grad_check(const std::function<Var(const Var&)>& f, const Tensor& x, double eps) {
  Var leaf(x, true);
  return grad_check_param([&] { return f(leaf); }, leaf, eps);
}

double grad_check_param(const std::function<Var()>& loss, Var& param, double eps) {
  check_eps(eps);
  param.zero_grad();
  Var out = loss();
  finite_scalar(out, 0);
  out.backward();
  const Tensor analytic = param.grad();

  double worst = 0.0;
  Tensor& values = param.mutable_value();
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double saved = values[i];
    values[i] = saved + eps;
    const double plus = finite_scalar(loss(), i);
    values[i] = saved - eps;
    const double minus = finite_scalar(loss(), i);
    values[i] = saved;
    worst = std::max(worst, compare(analytic, i, plus, minus, eps));
  }
  param.zero_grad();
  return worst;
}

}  // namespace insta
