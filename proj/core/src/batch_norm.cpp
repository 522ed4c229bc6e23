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

#include "insta/batch_norm.hpp"

#include <cmath>
#include <stdexcept>

#include "ops_internal.hpp"

namespace insta {

using ops::internal::grad_of;

BNState BNState::create(std::size_t channels, bool affine) {
  BNState s;
  s.gamma = Var(Tensor(Shape{channels}, 1.0), affine);
  s.beta = Var(Tensor(Shape{channels}, 0.0), affine);
  s.running_mean = Tensor(Shape{channels}, 0.0);
  s.running_var = Tensor(Shape{channels}, 1.0);
  return s;
}

std::vector<Var*> BNState::parameters() {
  std::vector<Var*> out;
  if (gamma.requires_grad()) out.push_back(&gamma);
  if (beta.requires_grad()) out.push_back(&beta);
  return out;
}

Var batch_norm(const Var& x, BNState& state) {
  const Shape& in = x.shape();
  if (in.size() < 2) throw std::invalid_argument("batch_norm expects batch x channels x ..., got " + shape_to_string(in));
  const std::size_t batch = in[0], channels = in[1];
  if (state.channels() != channels || state.gamma.shape() != Shape{channels} || state.beta.shape() != Shape{channels}) {
    throw ShapeError("batch_norm: state has " + std::to_string(state.channels()) + " channels, input " +
                     shape_to_string(in));
  }
  if (!(state.epsilon > 0.0)) throw std::invalid_argument("batch_norm: epsilon must be positive");
  if (!(state.momentum > 0.0 && state.momentum < 1.0)) throw std::invalid_argument("batch_norm: momentum must lie in (0,1)");
  const std::size_t inner = x.size() / (batch * channels);
  const double count = static_cast<double>(batch * inner);
  const Tensor& xv = x.value();
  const Tensor& gamma = state.gamma.value();
  const Tensor& beta = state.beta.value();

  std::vector<double> mean(channels, 0.0), inv_std(channels, 0.0);
  const bool train = state.mode == BnMode::train;
  for (std::size_t c = 0; c < channels; ++c) {
    if (train) {
      double s = 0.0;
      for (std::size_t n = 0; n < batch; ++n) {
        const double* p = xv.data().data() + (n * channels + c) * inner;
        for (std::size_t i = 0; i < inner; ++i) s += p[i];
      }
      const double mu = s / count;
      double ss = 0.0;
      for (std::size_t n = 0; n < batch; ++n) {
        const double* p = xv.data().data() + (n * channels + c) * inner;
        for (std::size_t i = 0; i < inner; ++i) ss += (p[i] - mu) * (p[i] - mu);
      }
      const double var = ss / count;
      mean[c] = mu;
      inv_std[c] = 1.0 / std::sqrt(var + state.epsilon);
      const double unbiased = count > 1.0 ? ss / (count - 1.0) : var;
      state.running_mean[c] = (1.0 - state.momentum) * state.running_mean[c] + state.momentum * mu;
      state.running_var[c] = (1.0 - state.momentum) * state.running_var[c] + state.momentum * unbiased;
    } else {
      if (state.running_var[c] < 0.0) throw std::invalid_argument("batch_norm: negative running variance");
      mean[c] = state.running_mean[c];
      inv_std[c] = 1.0 / std::sqrt(state.running_var[c] + state.epsilon);
    }
  }

  Tensor xhat(in, 0.0);
  Tensor out(in, 0.0);
  for (std::size_t n = 0; n < batch; ++n) {
    for (std::size_t c = 0; c < channels; ++c) {
      const std::size_t base = (n * channels + c) * inner;
      for (std::size_t i = 0; i < inner; ++i) {
        const double h = (xv[base + i] - mean[c]) * inv_std[c];
        xhat[base + i] = h;
        out[base + i] = gamma[c] * h + beta[c];
      }
    }
  }

  return Var::record(std::move(out), {x, state.gamma, state.beta},
                     [xhat = std::move(xhat), inv_std = std::move(inv_std), batch, channels, inner, count,
                      train](detail::Node& self) {
                       const Tensor& gamma = self.inputs[1]->value;
                       Tensor* gx = grad_of(self, 0);
                       Tensor* gg = grad_of(self, 1);
                       Tensor* gb = grad_of(self, 2);
                       for (std::size_t c = 0; c < channels; ++c) {
                         double sum_dy = 0.0, sum_dy_xhat = 0.0;
                         for (std::size_t n = 0; n < batch; ++n) {
                           const std::size_t base = (n * channels + c) * inner;
                           for (std::size_t i = 0; i < inner; ++i) {
                             sum_dy += self.grad[base + i];
                             sum_dy_xhat += self.grad[base + i] * xhat[base + i];
                           }
                         }
                         if (gg) (*gg)[c] += sum_dy_xhat;
                         if (gb) (*gb)[c] += sum_dy;
                         if (!gx) continue;
                         const double k = gamma[c] * inv_std[c];
                         for (std::size_t n = 0; n < batch; ++n) {
                           const std::size_t base = (n * channels + c) * inner;
                           for (std::size_t i = 0; i < inner; ++i) {
                             const double dy = self.grad[base + i];
                             if (train) {
                               (*gx)[base + i] += k / count * (count * dy - sum_dy - xhat[base + i] * sum_dy_xhat);
                             } else {
                               (*gx)[base + i] += k * dy;
                             }
                           }
                         }
                       }
                     });
}

}  // namespace insta
