#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace tsfm::ad {

using Shape = std::vector<std::size_t>;

std::string shape_str(const Shape& s);
std::size_t numel(const Shape& s);

// One dense float64 buffer plus its (lazily allocated) gradient.
struct Node {
  Shape shape;
  std::vector<double> value;
  std::vector<double> grad;  // empty until needed; same length as value after ensure_grad
  bool requires_grad = false;

  void ensure_grad();
};

// Value-semantics handle sharing a Node. Copies alias the same storage.
class Tensor {
 public:
  Tensor() = default;

  static Tensor constant(Shape shape, std::vector<double> value);
  static Tensor param(Shape shape, std::vector<double> value);
  static Tensor zeros(Shape shape);
  static Tensor full(Shape shape, double v);
  static Tensor scalar(double v);

  bool defined() const { return node != nullptr; }
  const Shape& shape() const { return node->shape; }
  std::size_t numel() const { return node->value.size(); }
  std::vector<double>& values() { return node->value; }
  const std::vector<double>& values() const { return node->value; }
  std::vector<double>& grads();
  bool requires_grad() const { return node && node->requires_grad; }
  void zero_grad();
  double item() const;

  std::shared_ptr<Node> node;
};

// Ordered record of primitive ops. Construction order is a topological order
// (inputs of every node precede it), so one reverse sweep visits each recorded
// node exactly once.
class Tape {
 public:
  void record(std::shared_ptr<Node> out, std::function<void()> backward);
  void backward(const Tensor& loss);
  std::size_t size() const { return entries_.size(); }
  void clear() { entries_.clear(); }

  static Tape* active();

 private:
  struct Entry {
    std::shared_ptr<Node> out;
    std::function<void()> fn;
  };
  std::vector<Entry> entries_;
  friend class TapeScope;
};

// RAII activation; ops record onto the innermost active tape of this thread.
class TapeScope {
 public:
  explicit TapeScope(Tape& tape);
  ~TapeScope();
  TapeScope(const TapeScope&) = delete;
  TapeScope& operator=(const TapeScope&) = delete;

 private:
  Tape* prev_;
};

// --- primitive operations ------------------------------------------------

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& x);  // 2-D

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor divide(const Tensor& a, const Tensor& b);
Tensor neg(const Tensor& x);

Tensor exp(const Tensor& x);
Tensor log(const Tensor& x);
Tensor pow(const Tensor& x, double p);
Tensor erf(const Tensor& x);
Tensor lgamma(const Tensor& x);
Tensor softplus(const Tensor& x);
Tensor sigmoid(const Tensor& x);

Tensor sum(const Tensor& x);
Tensor sum(const Tensor& x, std::size_t axis, bool keepdims);
Tensor mean(const Tensor& x);
Tensor mean(const Tensor& x, std::size_t axis, bool keepdims);

Tensor softmax(const Tensor& x, std::size_t axis);
// 2-D softmax restricted to `allow` (row-major R x C flags); disallowed
// entries are exactly zero. A row with no allowed entry is a contract error.
Tensor masked_softmax(const Tensor& x, const std::vector<std::uint8_t>& allow);

Tensor concat(const std::vector<Tensor>& xs, std::size_t axis);
Tensor slice(const Tensor& x, std::size_t axis, std::size_t start, std::size_t len);
Tensor reshape(const Tensor& x, Shape shape);
Tensor broadcast_to(const Tensor& x, const Shape& shape);

Tensor gather_rows(const Tensor& x, const std::vector<std::size_t>& idx);
// Rows scattered into a zero [num_rows x C] matrix; idx must be unique.
Tensor scatter_rows(const std::vector<std::size_t>& idx, const Tensor& rows,
                    std::size_t num_rows);

// Rotate row t of x (pairs (2k, 2k+1)) by angle pos[t] * base^(-2k/D).
Tensor rotary(const Tensor& x, const std::vector<long>& pos, double base);

// Copy of values with no gradient path.
Tensor detach(const Tensor& x);

// Custom-op escape hatch: computed values plus an explicit backward closure,
// recorded iff any input requires grad. The closure owns its captures.
Tensor make_traced(Shape shape, std::vector<double> value,
                   const std::vector<Tensor>& inputs,
                   const std::function<std::function<void()>(Tensor out)>& make_backward);

inline Tensor operator+(const Tensor& a, const Tensor& b) { return add(a, b); }
inline Tensor operator-(const Tensor& a, const Tensor& b) { return sub(a, b); }
inline Tensor operator*(const Tensor& a, const Tensor& b) { return mul(a, b); }
inline Tensor operator/(const Tensor& a, const Tensor& b) { return divide(a, b); }
inline Tensor operator-(const Tensor& x) { return neg(x); }

}  // namespace tsfm::ad
