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

#pragma once

#include <functional>

#include "insta/autograd.hpp"

namespace insta {

/// Largest coordinate-wise discrepancy between the analytic gradient and a
/// central difference, scaled as |analytic - numeric| / max(1, |analytic|).
///
/// `f` must be pure and return a single-element Var. `eps` must lie in
/// [1e-7, 1e-4]. Throws NumericError (with the coordinate) when f produces a
/// non-finite value.
double grad_check(const std::function<Var(const Var&)>& f, const Tensor& x, double eps = 1e-5);

/// Same measure for a loss closed over an existing leaf `param`; the leaf is
/// perturbed in place and restored. Gradients of the leaf are cleared first.
double grad_check_param(const std::function<Var()>& loss, Var& param, double eps = 1e-5);

}  // namespace insta
