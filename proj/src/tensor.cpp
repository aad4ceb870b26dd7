#include "tsfm/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <sstream>

#include "tsfm/errors.hpp"
#include "tsfm/kernels.hpp"
#include "tsfm/numerics.hpp"

namespace tsfm::ad {

namespace {
thread_local Tape* g_active_tape = nullptr;

constexpr double kTwoOverSqrtPi = 1.1283791670955126;

std::shared_ptr<Node> new_node(Shape shape, std::vector<double> value) {
  auto n = std::make_shared<Node>();
  n->shape = std::move(shape);
  n->value = std::move(value);
  return n;
}

bool any_requires_grad(std::initializer_list<const Tensor*> ins) {
  for (const Tensor* t : ins)
    if (t->requires_grad()) return true;
  return false;
}

// Marks `out` differentiable and records `fn` if a tape is active and any
// input carries gradient.
void trace(const Tensor& out, std::initializer_list<const Tensor*> ins,
           const std::function<void()>& fn) {
  Tape* tape = Tape::active();
  if (!tape || !any_requires_grad(ins)) return;
  out.node->requires_grad = true;
  out.node->ensure_grad();
  tape->record(out.node, fn);
}

// Strides of `in` viewed under broadcast to `out` (0 on expanded axes).
std::vector<std::size_t> bc_strides(const Shape& in, const Shape& out) {
  std::vector<std::size_t> strides(out.size(), 0);
  std::size_t s = 1;
  for (std::size_t r = 0; r < in.size(); ++r) {
    const std::size_t in_dim = in[in.size() - 1 - r];
    const std::size_t out_dim = out[out.size() - 1 - r];
    if (in_dim != out_dim && in_dim != 1)
      throw ContractError("broadcast: incompatible shapes " + shape_str(in) +
                          " vs " + shape_str(out));
    strides[out.size() - 1 - r] = (in_dim == 1) ? 0 : s;
    s *= in_dim;
  }
  return strides;
}

Shape bc_shape(const Shape& a, const Shape& b) {
  const std::size_t rank = std::max(a.size(), b.size());
  Shape out(rank, 1);
  for (std::size_t r = 0; r < rank; ++r) {
    const std::size_t da = r < a.size() ? a[a.size() - 1 - r] : 1;
    const std::size_t db = r < b.size() ? b[b.size() - 1 - r] : 1;
    if (da != db && da != 1 && db != 1)
      throw ContractError("broadcast: incompatible shapes " + shape_str(a) +
                          " vs " + shape_str(b));
    out[rank - 1 - r] = std::max(da, db);
  }
  return out;
}

// Visit every flat index of `out_shape` together with the broadcast offsets
// of two operands.
template <class F>
void bc_foreach(const Shape& out_shape, const std::vector<std::size_t>& sa,
                const std::vector<std::size_t>& sb, F&& f) {
  const std::size_t rank = out_shape.size();
  const std::size_t total = numel(out_shape);
  std::vector<std::size_t> idx(rank, 0);
  std::size_t oa = 0, ob = 0;
  for (std::size_t flat = 0; flat < total; ++flat) {
    f(flat, oa, ob);
    for (std::size_t r = rank; r-- > 0;) {
      ++idx[r];
      oa += sa[r];
      ob += sb[r];
      if (idx[r] < out_shape[r]) break;
      oa -= sa[r] * out_shape[r];
      ob -= sb[r] * out_shape[r];
      idx[r] = 0;
    }
  }
}

void check_2d(const Tensor& x, const char* what) {
  if (x.shape().size() != 2)
    throw ContractError(std::string(what) + ": expected 2-D tensor, got " +
                        shape_str(x.shape()));
}

}  // namespace

std::string shape_str(const Shape& s) {
  std::ostringstream os;
  os << "[";
  for (std::size_t i = 0; i < s.size(); ++i) os << (i ? "x" : "") << s[i];
  os << "]";
  return os.str();
}

std::size_t numel(const Shape& s) {
  return std::accumulate(s.begin(), s.end(), std::size_t{1},
                         std::multiplies<>());
}

void Node::ensure_grad() {
  if (grad.size() != value.size()) grad.assign(value.size(), 0.0);
}

Tensor Tensor::constant(Shape shape, std::vector<double> value) {
  if (tsfm::ad::numel(shape) != value.size())
    throw ContractError("tensor: shape " + shape_str(shape) +
                        " does not match buffer of " +
                        std::to_string(value.size()) + " elements");
  Tensor t;
  t.node = new_node(std::move(shape), std::move(value));
  return t;
}

Tensor Tensor::param(Shape shape, std::vector<double> value) {
  Tensor t = constant(std::move(shape), std::move(value));
  t.node->requires_grad = true;
  t.node->ensure_grad();
  return t;
}

Tensor Tensor::zeros(Shape shape) {
  const std::size_t n = tsfm::ad::numel(shape);
  return constant(std::move(shape), std::vector<double>(n, 0.0));
}

Tensor Tensor::full(Shape shape, double v) {
  const std::size_t n = tsfm::ad::numel(shape);
  return constant(std::move(shape), std::vector<double>(n, v));
}

Tensor Tensor::scalar(double v) { return constant({1}, {v}); }

std::vector<double>& Tensor::grads() {
  node->ensure_grad();
  return node->grad;
}

void Tensor::zero_grad() {
  node->ensure_grad();
  std::fill(node->grad.begin(), node->grad.end(), 0.0);
}

double Tensor::item() const {
  if (numel() != 1)
    throw ContractError("item: tensor has shape " + shape_str(shape()));
  return node->value[0];
}

Tape* Tape::active() { return g_active_tape; }

void Tape::record(std::shared_ptr<Node> out, std::function<void()> backward) {
  entries_.push_back({std::move(out), std::move(backward)});
}

void Tape::backward(const Tensor& loss) {
  if (loss.numel() != 1)
    throw ContractError("backward: loss must be scalar, got shape " +
                        shape_str(loss.shape()));
  loss.node->ensure_grad();
  loss.node->grad[0] = 1.0;
  for (std::size_t i = entries_.size(); i-- > 0;) entries_[i].fn();
}

TapeScope::TapeScope(Tape& tape) : prev_(g_active_tape) {
  g_active_tape = &tape;
}

TapeScope::~TapeScope() { g_active_tape = prev_; }

Tensor make_traced(Shape shape, std::vector<double> value,
                   const std::vector<Tensor>& inputs,
                   const std::function<std::function<void()>(Tensor)>& make_backward) {
  Tensor out = Tensor::constant(std::move(shape), std::move(value));
  Tape* tape = Tape::active();
  bool want = false;
  for (const Tensor& t : inputs) want = want || t.requires_grad();
  if (tape && want) {
    out.node->requires_grad = true;
    out.node->ensure_grad();
    tape->record(out.node, make_backward(out));
  }
  return out;
}

// --- matmul & transpose ---------------------------------------------------

Tensor matmul(const Tensor& a, const Tensor& b) {
  check_2d(a, "matmul");
  check_2d(b, "matmul");
  const std::size_t m = a.shape()[0], k = a.shape()[1];
  const std::size_t k2 = b.shape()[0], n = b.shape()[1];
  if (k != k2)
    throw ContractError("matmul: inner dimensions mismatch " +
                        shape_str(a.shape()) + " vs " + shape_str(b.shape()));
  std::vector<double> c(m * n);
  kernels::matmul(a.values().data(), b.values().data(), c.data(), m, k, n);
  Tensor out = Tensor::constant({m, n}, std::move(c));
  auto an = a.node, bn = b.node, on = out.node;
  trace(out, {&a, &b}, [an, bn, on, m, k, n] {
    if (an->requires_grad) {
      an->ensure_grad();
      kernels::matmul_grad_a(on->grad.data(), bn->value.data(),
                             an->grad.data(), m, k, n);
    }
    if (bn->requires_grad) {
      bn->ensure_grad();
      kernels::matmul_grad_b(an->value.data(), on->grad.data(),
                             bn->grad.data(), m, k, n);
    }
  });
  return out;
}

Tensor transpose(const Tensor& x) {
  check_2d(x, "transpose");
  const std::size_t r = x.shape()[0], c = x.shape()[1];
  std::vector<double> v(r * c);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) v[j * r + i] = x.values()[i * c + j];
  Tensor out = Tensor::constant({c, r}, std::move(v));
  auto xn = x.node, on = out.node;
  trace(out, {&x}, [xn, on, r, c] {
    if (!xn->requires_grad) return;
    xn->ensure_grad();
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < c; ++j)
        xn->grad[i * c + j] += on->grad[j * r + i];
  });
  return out;
}

// --- elementwise with broadcasting ----------------------------------------

namespace {

// fwd(a, b) -> out; ga/gb map (a, b, out, dout) -> grad contribution.
template <class F, class GA, class GB>
Tensor ew_binary(const Tensor& a, const Tensor& b, F fwd, GA ga, GB gb) {
  const bool same = a.shape() == b.shape();
  if (same) {
    const std::size_t n = a.numel();
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i)
      v[i] = fwd(a.values()[i], b.values()[i]);
    Tensor out = Tensor::constant(a.shape(), std::move(v));
    auto an = a.node, bn = b.node, on = out.node;
    trace(out, {&a, &b}, [an, bn, on, ga, gb, n] {
      for (std::size_t i = 0; i < n; ++i) {
        const double g = on->grad[i];
        if (an->requires_grad) {
          an->ensure_grad();
          an->grad[i] += ga(an->value[i], bn->value[i], on->value[i], g);
        }
        if (bn->requires_grad) {
          bn->ensure_grad();
          bn->grad[i] += gb(an->value[i], bn->value[i], on->value[i], g);
        }
      }
    });
    return out;
  }
  const Shape os = bc_shape(a.shape(), b.shape());
  const auto sa = bc_strides(a.shape(), os);
  const auto sb = bc_strides(b.shape(), os);
  std::vector<double> v(numel(os));
  bc_foreach(os, sa, sb, [&](std::size_t i, std::size_t ia, std::size_t ib) {
    v[i] = fwd(a.values()[ia], b.values()[ib]);
  });
  Tensor out = Tensor::constant(os, std::move(v));
  auto an = a.node, bn = b.node, on = out.node;
  trace(out, {&a, &b}, [an, bn, on, ga, gb, os, sa, sb] {
    bc_foreach(os, sa, sb, [&](std::size_t i, std::size_t ia, std::size_t ib) {
      const double g = on->grad[i];
      if (an->requires_grad) {
        an->ensure_grad();
        an->grad[ia] += ga(an->value[ia], bn->value[ib], on->value[i], g);
      }
      if (bn->requires_grad) {
        bn->ensure_grad();
        bn->grad[ib] += gb(an->value[ia], bn->value[ib], on->value[i], g);
      }
    });
  });
  return out;
}

// g maps (x, out, dout) -> dx contribution.
template <class F, class G>
Tensor ew_unary(const Tensor& x, F fwd, G g) {
  const std::size_t n = x.numel();
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = fwd(x.values()[i]);
  Tensor out = Tensor::constant(x.shape(), std::move(v));
  auto xn = x.node, on = out.node;
  trace(out, {&x}, [xn, on, g, n] {
    if (!xn->requires_grad) return;
    xn->ensure_grad();
    for (std::size_t i = 0; i < n; ++i)
      xn->grad[i] += g(xn->value[i], on->value[i], on->grad[i]);
  });
  return out;
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
  return ew_binary(
      a, b, [](double x, double y) { return x + y; },
      [](double, double, double, double g) { return g; },
      [](double, double, double, double g) { return g; });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  return ew_binary(
      a, b, [](double x, double y) { return x - y; },
      [](double, double, double, double g) { return g; },
      [](double, double, double, double g) { return -g; });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  return ew_binary(
      a, b, [](double x, double y) { return x * y; },
      [](double, double y, double, double g) { return g * y; },
      [](double x, double, double, double g) { return g * x; });
}

Tensor divide(const Tensor& a, const Tensor& b) {
  return ew_binary(
      a, b, [](double x, double y) { return x / y; },
      [](double, double y, double, double g) { return g / y; },
      [](double x, double y, double, double g) { return -g * x / (y * y); });
}

Tensor neg(const Tensor& x) {
  return ew_unary(
      x, [](double v) { return -v; },
      [](double, double, double g) { return -g; });
}

Tensor exp(const Tensor& x) {
  return ew_unary(
      x, [](double v) { return std::exp(v); },
      [](double, double y, double g) { return g * y; });
}

Tensor log(const Tensor& x) {
  return ew_unary(
      x, [](double v) { return std::log(v); },
      [](double v, double, double g) { return g / v; });
}

Tensor pow(const Tensor& x, double p) {
  return ew_unary(
      x, [p](double v) { return std::pow(v, p); },
      [p](double v, double, double g) { return g * p * std::pow(v, p - 1.0); });
}

Tensor erf(const Tensor& x) {
  return ew_unary(
      x, [](double v) { return std::erf(v); },
      [](double v, double, double g) {
        return g * kTwoOverSqrtPi * std::exp(-v * v);
      });
}

Tensor lgamma(const Tensor& x) {
  return ew_unary(
      x, [](double v) { return std::lgamma(v); },
      [](double v, double, double g) { return g * num::digamma(v); });
}

Tensor softplus(const Tensor& x) {
  return ew_unary(
      x, [](double v) { return num::softplus(v); },
      [](double v, double, double g) { return g * num::sigmoid(v); });
}

Tensor sigmoid(const Tensor& x) {
  return ew_unary(
      x, [](double v) { return num::sigmoid(v); },
      [](double, double y, double g) { return g * y * (1.0 - y); });
}

// --- reductions -------------------------------------------------------------

Tensor sum(const Tensor& x) {
  double acc = 0.0;
  for (double v : x.values()) acc += v;
  Tensor out = Tensor::constant({1}, {acc});
  auto xn = x.node, on = out.node;
  trace(out, {&x}, [xn, on] {
    if (!xn->requires_grad) return;
    xn->ensure_grad();
    const double g = on->grad[0];
    for (double& d : xn->grad) d += g;
  });
  return out;
}

Tensor mean(const Tensor& x) {
  const double n = static_cast<double>(x.numel());
  return divide(sum(x), Tensor::scalar(n));
}

namespace {

void axis_extents(const Shape& s, std::size_t axis, std::size_t& outer,
                  std::size_t& len, std::size_t& inner) {
  if (axis >= s.size())
    throw ContractError("reduction: axis " + std::to_string(axis) +
                        " out of range for shape " + shape_str(s));
  outer = 1;
  inner = 1;
  for (std::size_t i = 0; i < axis; ++i) outer *= s[i];
  len = s[axis];
  for (std::size_t i = axis + 1; i < s.size(); ++i) inner *= s[i];
}

Shape reduced_shape(const Shape& s, std::size_t axis, bool keepdims) {
  Shape out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i == axis) {
      if (keepdims) out.push_back(1);
    } else {
      out.push_back(s[i]);
    }
  }
  if (out.empty()) out.push_back(1);
  return out;
}

}  // namespace

Tensor sum(const Tensor& x, std::size_t axis, bool keepdims) {
  std::size_t outer, len, inner;
  axis_extents(x.shape(), axis, outer, len, inner);
  std::vector<double> v(outer * inner, 0.0);
  for (std::size_t o = 0; o < outer; ++o)
    for (std::size_t l = 0; l < len; ++l)
      for (std::size_t i = 0; i < inner; ++i)
        v[o * inner + i] += x.values()[(o * len + l) * inner + i];
  Tensor out = Tensor::constant(reduced_shape(x.shape(), axis, keepdims),
                                std::move(v));
  auto xn = x.node, on = out.node;
  trace(out, {&x}, [xn, on, outer, len, inner] {
    if (!xn->requires_grad) return;
    xn->ensure_grad();
    for (std::size_t o = 0; o < outer; ++o)
      for (std::size_t l = 0; l < len; ++l)
        for (std::size_t i = 0; i < inner; ++i)
          xn->grad[(o * len + l) * inner + i] += on->grad[o * inner + i];
  });
  return out;
}

Tensor mean(const Tensor& x, std::size_t axis, bool keepdims) {
  const double len = static_cast<double>(x.shape()[axis]);
  return divide(sum(x, axis, keepdims), Tensor::scalar(len));
}

// --- softmax ----------------------------------------------------------------

Tensor softmax(const Tensor& x, std::size_t axis) {
  std::size_t outer, len, inner;
  axis_extents(x.shape(), axis, outer, len, inner);
  for (double v : x.values())
    if (!std::isfinite(v))
      throw NumericError("softmax: non-finite input");
  std::vector<double> v(x.numel());
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t i = 0; i < inner; ++i) {
      double mx = -1e308;
      for (std::size_t l = 0; l < len; ++l)
        mx = std::max(mx, x.values()[(o * len + l) * inner + i]);
      double z = 0.0;
      for (std::size_t l = 0; l < len; ++l) {
        const std::size_t at = (o * len + l) * inner + i;
        v[at] = std::exp(x.values()[at] - mx);
        z += v[at];
      }
      for (std::size_t l = 0; l < len; ++l) v[(o * len + l) * inner + i] /= z;
    }
  }
  Tensor out = Tensor::constant(x.shape(), std::move(v));
  auto xn = x.node, on = out.node;
  trace(out, {&x}, [xn, on, outer, len, inner] {
    if (!xn->requires_grad) return;
    xn->ensure_grad();
    for (std::size_t o = 0; o < outer; ++o) {
      for (std::size_t i = 0; i < inner; ++i) {
        double dot = 0.0;
        for (std::size_t l = 0; l < len; ++l) {
          const std::size_t at = (o * len + l) * inner + i;
          dot += on->grad[at] * on->value[at];
        }
        for (std::size_t l = 0; l < len; ++l) {
          const std::size_t at = (o * len + l) * inner + i;
          xn->grad[at] += (on->grad[at] - dot) * on->value[at];
        }
      }
    }
  });
  return out;
}

Tensor masked_softmax(const Tensor& x, const std::vector<std::uint8_t>& allow) {
  check_2d(x, "masked_softmax");
  const std::size_t r = x.shape()[0], c = x.shape()[1];
  if (allow.size() != r * c)
    throw ContractError("masked_softmax: mask size mismatch");
  std::vector<double> v(r * c, 0.0);
  for (std::size_t i = 0; i < r; ++i) {
    double mx = -1e308;
    bool any = false;
    for (std::size_t j = 0; j < c; ++j) {
      if (!allow[i * c + j]) continue;
      any = true;
      mx = std::max(mx, x.values()[i * c + j]);
    }
    if (!any)
      throw ContractError("masked_softmax: row " + std::to_string(i) +
                          " has no allowed entries");
    double z = 0.0;
    for (std::size_t j = 0; j < c; ++j) {
      if (!allow[i * c + j]) continue;
      v[i * c + j] = std::exp(x.values()[i * c + j] - mx);
      z += v[i * c + j];
    }
    for (std::size_t j = 0; j < c; ++j)
      if (allow[i * c + j]) v[i * c + j] /= z;
  }
  Tensor out = Tensor::constant(x.shape(), std::move(v));
  auto xn = x.node, on = out.node;
  trace(out, {&x}, [xn, on, allow, r, c] {
    if (!xn->requires_grad) return;
    xn->ensure_grad();
    for (std::size_t i = 0; i < r; ++i) {
      double dot = 0.0;
      for (std::size_t j = 0; j < c; ++j)
        if (allow[i * c + j]) dot += on->grad[i * c + j] * on->value[i * c + j];
      for (std::size_t j = 0; j < c; ++j)
        if (allow[i * c + j])
          xn->grad[i * c + j] +=
              (on->grad[i * c + j] - dot) * on->value[i * c + j];
    }
  });
  return out;
}

// --- shape ops ----------------------------------------------------------------

Tensor concat(const std::vector<Tensor>& xs, std::size_t axis) {
  if (xs.empty()) throw ContractError("concat: no inputs");
  const Shape& ref = xs.front().shape();
  if (axis >= ref.size())
    throw ContractError("concat: axis out of range");
  Shape os = ref;
  os[axis] = 0;
  for (const Tensor& t : xs) {
    if (t.shape().size() != ref.size())
      throw ContractError("concat: rank mismatch");
    for (std::size_t i = 0; i < ref.size(); ++i)
      if (i != axis && t.shape()[i] != ref[i])
        throw ContractError("concat: shape mismatch " + shape_str(t.shape()) +
                            " vs " + shape_str(ref));
    os[axis] += t.shape()[axis];
  }
  std::size_t outer = 1, inner = 1;
  for (std::size_t i = 0; i < axis; ++i) outer *= os[i];
  for (std::size_t i = axis + 1; i < os.size(); ++i) inner *= os[i];
  std::vector<double> v(numel(os));
  std::size_t off = 0;
  for (const Tensor& t : xs) {
    const std::size_t len = t.shape()[axis];
    for (std::size_t o = 0; o < outer; ++o)
      for (std::size_t l = 0; l < len; ++l)
        for (std::size_t i = 0; i < inner; ++i)
          v[(o * os[axis] + off + l) * inner + i] =
              t.values()[(o * len + l) * inner + i];
    off += len;
  }
  Tensor out = Tensor::constant(os, std::move(v));
  std::vector<std::shared_ptr<Node>> in_nodes;
  in_nodes.reserve(xs.size());
  bool want = false;
  for (const Tensor& t : xs) {
    in_nodes.push_back(t.node);
    want = want || t.requires_grad();
  }
  Tape* tape = Tape::active();
  if (tape && want) {
    out.node->requires_grad = true;
    out.node->ensure_grad();
    auto on = out.node;
    const std::size_t cat = os[axis];
    tape->record(on, [in_nodes, on, outer, inner, cat, axis] {
      std::size_t off2 = 0;
      for (const auto& xn : in_nodes) {
        const std::size_t len = xn->shape[axis];
        if (xn->requires_grad) {
          xn->ensure_grad();
          for (std::size_t o = 0; o < outer; ++o)
            for (std::size_t l = 0; l < len; ++l)
              for (std::size_t i = 0; i < inner; ++i)
                xn->grad[(o * len + l) * inner + i] +=
                    on->grad[(o * cat + off2 + l) * inner + i];
        }
        off2 += len;
      }
    });
  }
  return out;
}

Tensor slice(const Tensor& x, std::size_t axis, std::size_t start,
             std::size_t len) {
  const Shape& s = x.shape();
  if (axis >= s.size() || start + len > s[axis])
    throw ContractError("slice: range [" + std::to_string(start) + ", " +
                        std::to_string(start + len) + ") invalid for shape " +
                        shape_str(s) + " axis " + std::to_string(axis));
  std::size_t outer = 1, inner = 1;
  for (std::size_t i = 0; i < axis; ++i) outer *= s[i];
  for (std::size_t i = axis + 1; i < s.size(); ++i) inner *= s[i];
  Shape os = s;
  os[axis] = len;
  std::vector<double> v(numel(os));
  const std::size_t full = s[axis];
  for (std::size_t o = 0; o < outer; ++o)
    for (std::size_t l = 0; l < len; ++l)
      for (std::size_t i = 0; i < inner; ++i)
        v[(o * len + l) * inner + i] =
            x.values()[(o * full + start + l) * inner + i];
  Tensor out = Tensor::constant(os, std::move(v));
  auto xn = x.node, on = out.node;
  trace(out, {&x}, [xn, on, outer, inner, len, full, start] {
    if (!xn->requires_grad) return;
    xn->ensure_grad();
    for (std::size_t o = 0; o < outer; ++o)
      for (std::size_t l = 0; l < len; ++l)
        for (std::size_t i = 0; i < inner; ++i)
          xn->grad[(o * full + start + l) * inner + i] +=
              on->grad[(o * len + l) * inner + i];
  });
  return out;
}

Tensor reshape(const Tensor& x, Shape shape) {
  if (numel(shape) != x.numel())
    throw ContractError("reshape: cannot view " + shape_str(x.shape()) +
                        " as " + shape_str(shape));
  Tensor out = Tensor::constant(std::move(shape), x.values());
  auto xn = x.node, on = out.node;
  trace(out, {&x}, [xn, on] {
    if (!xn->requires_grad) return;
    xn->ensure_grad();
    for (std::size_t i = 0; i < xn->grad.size(); ++i)
      xn->grad[i] += on->grad[i];
  });
  return out;
}

Tensor broadcast_to(const Tensor& x, const Shape& shape) {
  const auto sx = bc_strides(x.shape(), shape);
  const auto sz = bc_strides(shape, shape);
  std::vector<double> v(numel(shape));
  bc_foreach(shape, sx, sz, [&](std::size_t i, std::size_t ix, std::size_t) {
    v[i] = x.values()[ix];
  });
  Tensor out = Tensor::constant(shape, std::move(v));
  auto xn = x.node, on = out.node;
  trace(out, {&x}, [xn, on, shape, sx, sz] {
    if (!xn->requires_grad) return;
    xn->ensure_grad();
    bc_foreach(shape, sx, sz, [&](std::size_t i, std::size_t ix, std::size_t) {
      xn->grad[ix] += on->grad[i];
    });
  });
  return out;
}

Tensor gather_rows(const Tensor& x, const std::vector<std::size_t>& idx) {
  check_2d(x, "gather_rows");
  const std::size_t rows = x.shape()[0], c = x.shape()[1];
  std::vector<double> v(idx.size() * c);
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (idx[i] >= rows) throw ContractError("gather_rows: index out of range");
    std::copy_n(x.values().data() + idx[i] * c, c, v.data() + i * c);
  }
  Tensor out = Tensor::constant({idx.size(), c}, std::move(v));
  auto xn = x.node, on = out.node;
  trace(out, {&x}, [xn, on, idx, c] {
    if (!xn->requires_grad) return;
    xn->ensure_grad();
    for (std::size_t i = 0; i < idx.size(); ++i)
      for (std::size_t j = 0; j < c; ++j)
        xn->grad[idx[i] * c + j] += on->grad[i * c + j];
  });
  return out;
}

Tensor scatter_rows(const std::vector<std::size_t>& idx, const Tensor& rows,
                    std::size_t num_rows) {
  check_2d(rows, "scatter_rows");
  if (idx.size() != rows.shape()[0])
    throw ContractError("scatter_rows: index count mismatch");
  const std::size_t c = rows.shape()[1];
  std::vector<double> v(num_rows * c, 0.0);
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (idx[i] >= num_rows)
      throw ContractError("scatter_rows: index out of range");
    std::copy_n(rows.values().data() + i * c, c, v.data() + idx[i] * c);
  }
  Tensor out = Tensor::constant({num_rows, c}, std::move(v));
  auto rn = rows.node, on = out.node;
  trace(out, {&rows}, [rn, on, idx, c] {
    if (!rn->requires_grad) return;
    rn->ensure_grad();
    for (std::size_t i = 0; i < idx.size(); ++i)
      for (std::size_t j = 0; j < c; ++j)
        rn->grad[i * c + j] += on->grad[idx[i] * c + j];
  });
  return out;
}

Tensor rotary(const Tensor& x, const std::vector<long>& pos, double base) {
  check_2d(x, "rotary");
  const std::size_t t = x.shape()[0], d = x.shape()[1];
  if (d % 2 != 0) throw ContractError("rotary: head dim must be even");
  if (pos.size() != t) throw ContractError("rotary: position count mismatch");
  const std::size_t half = d / 2;
  std::vector<double> theta(half);
  for (std::size_t k = 0; k < half; ++k)
    theta[k] = std::pow(base, -2.0 * static_cast<double>(k) /
                                  static_cast<double>(d));
  std::vector<double> v(t * d);
  for (std::size_t i = 0; i < t; ++i) {
    const double p = static_cast<double>(pos[i]);
    for (std::size_t k = 0; k < half; ++k) {
      const double ang = p * theta[k];
      const double cs = std::cos(ang), sn = std::sin(ang);
      const double x0 = x.values()[i * d + 2 * k];
      const double x1 = x.values()[i * d + 2 * k + 1];
      v[i * d + 2 * k] = cs * x0 - sn * x1;
      v[i * d + 2 * k + 1] = sn * x0 + cs * x1;
    }
  }
  Tensor out = Tensor::constant(x.shape(), std::move(v));
  auto xn = x.node, on = out.node;
  trace(out, {&x}, [xn, on, pos, theta, t, d] {
    if (!xn->requires_grad) return;
    xn->ensure_grad();
    const std::size_t half = d / 2;
    for (std::size_t i = 0; i < t; ++i) {
      const double p = static_cast<double>(pos[i]);
      for (std::size_t k = 0; k < half; ++k) {
        const double ang = p * theta[k];
        const double cs = std::cos(ang), sn = std::sin(ang);
        const double g0 = on->grad[i * d + 2 * k];
        const double g1 = on->grad[i * d + 2 * k + 1];
        xn->grad[i * d + 2 * k] += cs * g0 + sn * g1;
        xn->grad[i * d + 2 * k + 1] += -sn * g0 + cs * g1;
      }
    }
  });
  return out;
}

Tensor detach(const Tensor& x) {
  return Tensor::constant(x.shape(), x.values());
}

}  // namespace tsfm::ad
