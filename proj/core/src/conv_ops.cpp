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

// Products below this size would take Eigen's coefficient-wise path, whose
// rounding depends on buffer alignment.
#define EIGEN_GEMM_TO_COEFFBASED_THRESHOLD 1
#include <Eigen/Core>
#include <algorithm>
#include <memory>
#include <string>

#include "insta/ops.hpp"
#include "ops_internal.hpp"

namespace insta::ops {

using internal::grad_of;
using internal::input_value;

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatMap = Eigen::Map<RowMatrix>;
using ConstMatMap = Eigen::Map<const RowMatrix>;
using StridedMap = Eigen::Map<const RowMatrix, 0, Eigen::OuterStride<>>;

// Fixed-order row sums; Eigen's vectorized reductions peel by address.
void add_row_sums(const double* m, std::size_t rows, std::size_t cols, std::size_t ld, double* out) {
  for (std::size_t r = 0; r < rows; ++r) {
    double acc = 0.0;
    for (std::size_t j = 0; j < cols; ++j) acc += m[r * ld + j];
    out[r] += acc;
  }
}

void require_odd(std::size_t k) {
  if (k == 0 || k % 2 == 0) throw std::invalid_argument("kernel extent must be odd and positive, got " + std::to_string(k));
}

std::vector<Var> defined_only(std::initializer_list<Var> vars) {
  std::vector<Var> out;
  for (const Var& v : vars) {
    if (v.defined()) out.push_back(v);
  }
  return out;
}

// Patch matrix (c * kh * kw) x (ho * wo) of one image; rows are `ld` apart.
void im2col(const double* img, std::size_t c, std::size_t h, std::size_t w, std::size_t kh, std::size_t kw,
            std::size_t pad, std::size_t ho, std::size_t wo, std::size_t ld, double* col) {
  for (std::size_t ch = 0; ch < c; ++ch) {
    for (std::size_t p = 0; p < kh; ++p) {
      for (std::size_t q = 0; q < kw; ++q) {
        double* row = col + ((ch * kh + p) * kw + q) * ld;
        // Output columns x with 0 <= x + q - pad < w.
        const std::size_t x0 = pad > q ? std::min(pad - q, wo) : 0;
        const std::size_t x1 = w + pad > q ? std::min(wo, w + pad - q) : 0;
        for (std::size_t y = 0; y < ho; ++y) {
          double* dst = row + y * wo;
          const std::ptrdiff_t sy = static_cast<std::ptrdiff_t>(y + p) - static_cast<std::ptrdiff_t>(pad);
          if (sy < 0 || sy >= static_cast<std::ptrdiff_t>(h) || x0 >= x1) {
            std::fill(dst, dst + wo, 0.0);
            continue;
          }
          const double* src = img + (ch * h + static_cast<std::size_t>(sy)) * w + (x0 + q - pad);
          std::fill(dst, dst + x0, 0.0);
          std::copy(src, src + (x1 - x0), dst + x0);
          std::fill(dst + x1, dst + wo, 0.0);
        }
      }
    }
  }
}

void col2im(const double* col, std::size_t c, std::size_t h, std::size_t w, std::size_t kh, std::size_t kw,
            std::size_t pad, std::size_t ho, std::size_t wo, std::size_t ld, double* img) {
  for (std::size_t ch = 0; ch < c; ++ch) {
    for (std::size_t p = 0; p < kh; ++p) {
      for (std::size_t q = 0; q < kw; ++q) {
        const double* row = col + ((ch * kh + p) * kw + q) * ld;
        for (std::size_t y = 0; y < ho; ++y) {
          const std::ptrdiff_t sy = static_cast<std::ptrdiff_t>(y + p) - static_cast<std::ptrdiff_t>(pad);
          if (sy < 0 || sy >= static_cast<std::ptrdiff_t>(h)) continue;
          for (std::size_t x = 0; x < wo; ++x) {
            const std::ptrdiff_t sx = static_cast<std::ptrdiff_t>(x + q) - static_cast<std::ptrdiff_t>(pad);
            if (sx < 0 || sx >= static_cast<std::ptrdiff_t>(w)) continue;
            img[(ch * h + static_cast<std::size_t>(sy)) * w + static_cast<std::size_t>(sx)] += row[y * wo + x];
          }
        }
      }
    }
  }
}

}  // namespace

Var unfold(const Var& x, std::size_t k) {
  require_odd(k);
  const Shape& in = x.shape();
  if (in.size() != 3 && in.size() != 4) {
    throw ShapeError("unfold expects c x h x w (optionally batched), got " + shape_to_string(in));
  }
  const std::size_t h = in[in.size() - 2], w = in[in.size() - 1];
  const std::size_t planes = x.size() / (h * w);
  const std::size_t r = (k - 1) / 2;
  Shape out_shape = in;
  out_shape.push_back(k);
  out_shape.push_back(k);
  Tensor out(out_shape, 0.0);
  const double* src = x.value().data().data();
  double* dst = out.data().data();
  // Maps each output tap to its source offset (or -1 for padding); shared by backward.
  std::vector<std::ptrdiff_t> source(h * w * k * k, -1);
  for (std::size_t a = 0; a < h; ++a) {
    for (std::size_t b = 0; b < w; ++b) {
      for (std::size_t p = 0; p < k; ++p) {
        for (std::size_t q = 0; q < k; ++q) {
          const std::ptrdiff_t sa = static_cast<std::ptrdiff_t>(a + p) - static_cast<std::ptrdiff_t>(r);
          const std::ptrdiff_t sb = static_cast<std::ptrdiff_t>(b + q) - static_cast<std::ptrdiff_t>(r);
          if (sa >= 0 && sb >= 0 && sa < static_cast<std::ptrdiff_t>(h) && sb < static_cast<std::ptrdiff_t>(w)) {
            source[((a * w + b) * k + p) * k + q] = sa * static_cast<std::ptrdiff_t>(w) + sb;
          }
        }
      }
    }
  }
  const std::size_t plane_out = h * w * k * k;
  for (std::size_t pl = 0; pl < planes; ++pl) {
    for (std::size_t t = 0; t < plane_out; ++t) {
      if (source[t] >= 0) dst[pl * plane_out + t] = src[pl * h * w + static_cast<std::size_t>(source[t])];
    }
  }
  return Var::record(std::move(out), {x}, [source = std::move(source), planes, plane_out, h, w](detail::Node& self) {
    Tensor& g = *grad_of(self, 0);
    for (std::size_t pl = 0; pl < planes; ++pl) {
      for (std::size_t t = 0; t < plane_out; ++t) {
        if (source[t] >= 0) g[pl * h * w + static_cast<std::size_t>(source[t])] += self.grad[pl * plane_out + t];
      }
    }
  });
}

Var conv1x1(const Var& x, const Var& weight, const Var& bias) {
  const Shape& in = x.shape();
  if (in.size() < 3) throw ShapeError("conv1x1 expects [..., c, h, w], got " + shape_to_string(in));
  if (weight.shape().size() != 2) throw ShapeError("conv1x1 weight must be c_out x c_in");
  const std::size_t c_in = in[in.size() - 3];
  const std::size_t c_out = weight.shape()[0];
  if (weight.shape()[1] != c_in) {
    throw ShapeError("conv1x1: weight " + shape_to_string(weight.shape()) + " incompatible with input " +
                     shape_to_string(in));
  }
  const bool has_bias = bias.defined();
  if (has_bias && bias.shape() != Shape{c_out}) throw ShapeError("conv1x1: bias must have c_out entries");
  const std::size_t pix = in[in.size() - 2] * in[in.size() - 1];
  const std::size_t batch = x.size() / (c_in * pix);
  Shape out_shape = in;
  out_shape[in.size() - 3] = c_out;
  Tensor out(out_shape, 0.0);
  const Tensor& xv = x.value();
  const Tensor& wv = weight.value();
  for (std::size_t n = 0; n < batch; ++n) {
    ConstMatMap xm(xv.data().data() + n * c_in * pix, static_cast<Eigen::Index>(c_in), static_cast<Eigen::Index>(pix));
    ConstMatMap wm(wv.data().data(), static_cast<Eigen::Index>(c_out), static_cast<Eigen::Index>(c_in));
    MatMap om(out.data().data() + n * c_out * pix, static_cast<Eigen::Index>(c_out), static_cast<Eigen::Index>(pix));
    om.noalias() = wm * xm;
    if (has_bias) {
      for (std::size_t o = 0; o < c_out; ++o) om.row(static_cast<Eigen::Index>(o)).array() += bias.value()[o];
    }
  }
  return Var::record(std::move(out), defined_only({x, weight, bias}), [=](detail::Node& self) {
    const Tensor& xv = input_value(self, 0);
    const Tensor& wv = input_value(self, 1);
    Tensor* gx = grad_of(self, 0);
    Tensor* gw = grad_of(self, 1);
    Tensor* gb = has_bias ? grad_of(self, 2) : nullptr;
    const auto ci = static_cast<Eigen::Index>(c_in), co = static_cast<Eigen::Index>(c_out),
               px = static_cast<Eigen::Index>(pix);
    ConstMatMap wm(wv.data().data(), co, ci);
    for (std::size_t n = 0; n < batch; ++n) {
      ConstMatMap up(self.grad.data().data() + n * c_out * pix, co, px);
      if (gx) {
        MatMap gxm(gx->data().data() + n * c_in * pix, ci, px);
        gxm.noalias() += wm.transpose() * up;
      }
      if (gw) {
        ConstMatMap xm(xv.data().data() + n * c_in * pix, ci, px);
        MatMap gwm(gw->data().data(), co, ci);
        gwm.noalias() += up * xm.transpose();
      }
      if (gb) add_row_sums(up.data(), c_out, pix, pix, gb->data().data());
    }
  });
}

Var linear(const Var& x, const Var& weight, const Var& bias) {
  const Shape& in = x.shape();
  if (in.empty()) throw ShapeError("linear expects at least rank 1 input");
  if (weight.shape().size() != 2 || weight.shape()[1] != in.back()) {
    throw ShapeError("linear: weight " + shape_to_string(weight.shape()) + " incompatible with input " +
                     shape_to_string(in));
  }
  const std::size_t c_in = in.back();
  const std::size_t c_out = weight.shape()[0];
  const bool has_bias = bias.defined();
  if (has_bias && bias.shape() != Shape{c_out}) throw ShapeError("linear: bias must have c_out entries");
  const std::size_t rows = x.size() / c_in;
  Shape out_shape = in;
  out_shape.back() = c_out;
  Tensor out(out_shape, 0.0);
  // Plain loops: every output row is computed the same way wherever it sits
  // in the batch.
  const double* xp = x.value().data().data();
  const double* wp = weight.value().data().data();
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t o = 0; o < c_out; ++o) {
      double acc = 0.0;
      for (std::size_t i = 0; i < c_in; ++i) acc += xp[r * c_in + i] * wp[o * c_in + i];
      out[r * c_out + o] = has_bias ? acc + bias.value()[o] : acc;
    }
  }
  return Var::record(std::move(out), defined_only({x, weight, bias}), [=](detail::Node& self) {
    const double* up = self.grad.data().data();
    const double* xv = input_value(self, 0).data().data();
    const double* wv = input_value(self, 1).data().data();
    if (Tensor* gx = grad_of(self, 0)) {
      for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t o = 0; o < c_out; ++o) {
          const double u = up[r * c_out + o];
          for (std::size_t i = 0; i < c_in; ++i) (*gx)[r * c_in + i] += u * wv[o * c_in + i];
        }
      }
    }
    if (Tensor* gw = grad_of(self, 1)) {
      for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t o = 0; o < c_out; ++o) {
          const double u = up[r * c_out + o];
          for (std::size_t i = 0; i < c_in; ++i) (*gw)[o * c_in + i] += u * xv[r * c_in + i];
        }
      }
    }
    if (has_bias) {
      if (Tensor* gb = grad_of(self, 2)) {
        for (std::size_t r = 0; r < rows; ++r) {
          for (std::size_t o = 0; o < c_out; ++o) (*gb)[o] += up[r * c_out + o];
        }
      }
    }
  });
}

Var conv2d(const Var& x, const Var& weight, const Var& bias, std::size_t padding) {
  const Shape& in = x.shape();
  const Shape& ws = weight.shape();
  if (in.size() != 4 || ws.size() != 4 || ws[1] != in[1]) {
    throw ShapeError("conv2d: input " + shape_to_string(in) + " incompatible with weight " + shape_to_string(ws));
  }
  const std::size_t batch = in[0], c_in = in[1], h = in[2], w = in[3];
  const std::size_t c_out = ws[0], kh = ws[2], kw = ws[3];
  if (h + 2 * padding < kh || w + 2 * padding < kw) throw ShapeError("conv2d: kernel larger than padded input");
  const std::size_t ho = h + 2 * padding - kh + 1, wo = w + 2 * padding - kw + 1;
  const bool has_bias = bias.defined();
  if (has_bias && bias.shape() != Shape{c_out}) throw ShapeError("conv2d: bias must have c_out entries");

  // All images share one patch matrix. The forward product runs per image so
  // that an image's output does not depend on the rest of the batch; the
  // backward products span the whole batch.
  const std::size_t patch = c_in * kh * kw, opix = ho * wo, cols = batch * opix;
  const auto P = static_cast<Eigen::Index>(patch), O = static_cast<Eigen::Index>(opix),
             CO = static_cast<Eigen::Index>(c_out), BO = static_cast<Eigen::Index>(cols);
  std::unique_ptr<double[]> col(new double[patch * cols]);
  for (std::size_t n = 0; n < batch; ++n) {
    im2col(x.value().data().data() + n * c_in * h * w, c_in, h, w, kh, kw, padding, ho, wo, cols, col.get() + n * opix);
  }
  const ConstMatMap wm(weight.value().data().data(), CO, P);
  Tensor out(Shape{batch, c_out, ho, wo}, 0.0);
  for (std::size_t n = 0; n < batch; ++n) {
    MatMap om(out.data().data() + n * c_out * opix, CO, O);
    om.noalias() = wm * StridedMap(col.get() + n * opix, P, O, Eigen::OuterStride<>(BO));
    if (has_bias) {
      for (Eigen::Index o = 0; o < CO; ++o) om.row(o).array() += bias.value()[static_cast<std::size_t>(o)];
    }
  }
  col.reset();
  return Var::record(std::move(out), defined_only({x, weight, bias}), [=](detail::Node& self) {
    const Tensor& xv = input_value(self, 0);
    Tensor* gx = grad_of(self, 0);
    Tensor* gw = grad_of(self, 1);
    Tensor* gb = has_bias ? grad_of(self, 2) : nullptr;
    RowMatrix up(CO, BO);
    for (std::size_t n = 0; n < batch; ++n) {
      up.middleCols(static_cast<Eigen::Index>(n * opix), O) = ConstMatMap(self.grad.data().data() + n * c_out * opix, CO, O);
    }
    if (gb) add_row_sums(up.data(), c_out, cols, cols, gb->data().data());
    if (gw) {
      std::unique_ptr<double[]> col(new double[patch * cols]);
      for (std::size_t n = 0; n < batch; ++n) {
        im2col(xv.data().data() + n * c_in * h * w, c_in, h, w, kh, kw, padding, ho, wo, cols, col.get() + n * opix);
      }
      MatMap(gw->data().data(), CO, P).noalias() += up * ConstMatMap(col.get(), P, BO).transpose();
    }
    if (gx) {
      const RowMatrix dcol = ConstMatMap(input_value(self, 1).data().data(), CO, P).transpose() * up;
      for (std::size_t n = 0; n < batch; ++n) {
        col2im(dcol.data() + n * opix, c_in, h, w, kh, kw, padding, ho, wo, cols, gx->data().data() + n * c_in * h * w);
      }
    }
  });
}

Var max_pool2(const Var& x) {
  const Shape& in = x.shape();
  if (in.size() != 4 || in[2] < 2 || in[3] < 2) throw ShapeError("max_pool2 expects batch x c x H x W with H, W >= 2");
  const std::size_t planes = in[0] * in[1], h = in[2], w = in[3];
  const std::size_t ho = h / 2, wo = w / 2;
  Tensor out(Shape{in[0], in[1], ho, wo}, 0.0);
  std::vector<std::size_t> argmax(out.size());
  const Tensor& xv = x.value();
  for (std::size_t pl = 0; pl < planes; ++pl) {
    for (std::size_t y = 0; y < ho; ++y) {
      for (std::size_t z = 0; z < wo; ++z) {
        std::size_t best = pl * h * w + (2 * y) * w + 2 * z;
        for (std::size_t dy = 0; dy < 2; ++dy) {
          for (std::size_t dz = 0; dz < 2; ++dz) {
            const std::size_t idx = pl * h * w + (2 * y + dy) * w + 2 * z + dz;
            if (xv[idx] > xv[best]) best = idx;
          }
        }
        const std::size_t o = (pl * ho + y) * wo + z;
        out[o] = xv[best];
        argmax[o] = best;
      }
    }
  }
  return Var::record(std::move(out), {x}, [argmax = std::move(argmax)](detail::Node& self) {
    Tensor& g = *grad_of(self, 0);
    for (std::size_t o = 0; o < argmax.size(); ++o) g[argmax[o]] += self.grad[o];
  });
}

}  // namespace insta::ops
