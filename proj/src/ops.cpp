#include "afford/ops.hpp"

#include <algorithm>
#include <cmath>

#include "afford/linalg.hpp"

namespace afford {

namespace {

void require_vector(const Tensor& t, const char* name) {
  if (t.rank() != 1) {
    throw NumericError(std::string(name) + " must be rank-1, got shape " + t.shape_str());
  }
}

}  // namespace

Tensor linear(const Tensor& w, const Tensor& b, const Tensor& x) {
  if (w.rank() != 2) throw NumericError("linear: W must be rank-2, got " + w.shape_str());
  require_vector(b, "linear: b");
  require_vector(x, "linear: x");
  if (w.cols() != x.size() || w.rows() != b.size()) {
    throw NumericError("linear: shape mismatch, W=" + w.shape_str() + " b=" + b.shape_str() +
                       " x=" + x.shape_str());
  }
  Tensor y = Tensor::zeros({w.rows()});
  linalg::matvec(w.data(), w.rows(), w.cols(), x.data(), y.data());
  linalg::add(y.data(), b.data(), y.size());
  return y;
}

LinearGrads linear_backward(const Tensor& w, const Tensor& x, const Tensor& dy) {
  if (dy.size() != w.rows() || x.size() != w.cols()) {
    throw NumericError("linear_backward: shape mismatch, W=" + w.shape_str() +
                       " x=" + x.shape_str() + " dy=" + dy.shape_str());
  }
  LinearGrads g;
  g.dw = Tensor::zeros({w.rows(), w.cols()});
  g.db = dy;
  g.dx = Tensor::zeros({w.cols()});
  linalg::outer_add(g.dw.data(), dy.data(), w.rows(), x.data(), w.cols());
  linalg::matvec_t_add(w.data(), w.rows(), w.cols(), dy.data(), g.dx.data());
  return g;
}

Tensor relu(const Tensor& x) {
  Tensor y = x;
  for (int i = 0; i < y.size(); ++i) y[i] = std::max(0.0, y[i]);
  return y;
}

Tensor relu_backward(const Tensor& y, const Tensor& dy) {
  Tensor dx = dy;
  for (int i = 0; i < dx.size(); ++i) {
    if (y[i] <= 0.0) dx[i] = 0.0;
  }
  return dx;
}

Tensor sigmoid(const Tensor& x) {
  Tensor y = x;
  for (int i = 0; i < y.size(); ++i) y[i] = 1.0 / (1.0 + std::exp(-y[i]));
  return y;
}

Tensor sigmoid_backward(const Tensor& y, const Tensor& dy) {
  Tensor dx = dy;
  for (int i = 0; i < dx.size(); ++i) dx[i] *= y[i] * (1.0 - y[i]);
  return dx;
}

Tensor tanh(const Tensor& x) {
  Tensor y = x;
  for (int i = 0; i < y.size(); ++i) y[i] = std::tanh(y[i]);
  return y;
}

Tensor tanh_backward(const Tensor& y, const Tensor& dy) {
  Tensor dx = dy;
  for (int i = 0; i < dx.size(); ++i) dx[i] *= 1.0 - y[i] * y[i];
  return dx;
}

Tensor hadamard(const Tensor& a, const Tensor& b) {
  if (!a.same_shape(b)) {
    throw NumericError("hadamard: shape mismatch " + a.shape_str() + " vs " + b.shape_str());
  }
  Tensor y = a;
  for (int i = 0; i < y.size(); ++i) y[i] *= b[i];
  return y;
}

Tensor softmax(const Tensor& x) {
  if (x.size() < 1) throw NumericError("softmax: empty input");
  Tensor y = x;
  double m = y[0];
  for (int i = 1; i < y.size(); ++i) m = std::max(m, y[i]);
  double z = 0.0;
  for (int i = 0; i < y.size(); ++i) {
    y[i] = std::exp(y[i] - m);
    z += y[i];
  }
  for (int i = 0; i < y.size(); ++i) y[i] /= z;
  return y;
}

Tensor softmax_backward(const Tensor& y, const Tensor& dy) {
  double s = 0.0;
  for (int i = 0; i < y.size(); ++i) s += dy[i] * y[i];
  Tensor dx = y;
  for (int i = 0; i < dx.size(); ++i) dx[i] = y[i] * (dy[i] - s);
  return dx;
}

double cross_entropy(const Tensor& logits, int target) {
  if (target < 0 || target >= logits.size()) {
    throw NumericError("cross_entropy: target " + std::to_string(target) +
                       " out of range for " + std::to_string(logits.size()) + " logits");
  }
  double m = logits[0];
  for (int i = 1; i < logits.size(); ++i) m = std::max(m, logits[i]);
  double z = 0.0;
  for (int i = 0; i < logits.size(); ++i) z += std::exp(logits[i] - m);
  return std::log(z) - (logits[target] - m);
}

Tensor cross_entropy_grad(const Tensor& logits, int target) {
  if (target < 0 || target >= logits.size()) {
    throw NumericError("cross_entropy_grad: target " + std::to_string(target) +
                       " out of range for " + std::to_string(logits.size()) + " logits");
  }
  Tensor g = softmax(logits);
  g[target] -= 1.0;
  return g;
}

}  // namespace afford
