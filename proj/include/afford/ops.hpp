#pragma once

#include "afford/tensor.hpp"

namespace afford {

// Forward ops used by the model, each with an exact analytic backward. The
// *_backward(y, dy) variants take the op's own output, from which the local
// derivative is recoverable.

// y = W x + b. W is m x n, b and y length m, x length n.
Tensor linear(const Tensor& w, const Tensor& b, const Tensor& x);

struct LinearGrads {
  Tensor dw, db, dx;
};
LinearGrads linear_backward(const Tensor& w, const Tensor& x, const Tensor& dy);

Tensor relu(const Tensor& x);
Tensor relu_backward(const Tensor& y, const Tensor& dy);

Tensor sigmoid(const Tensor& x);
Tensor sigmoid_backward(const Tensor& y, const Tensor& dy);

Tensor tanh(const Tensor& x);
Tensor tanh_backward(const Tensor& y, const Tensor& dy);

Tensor hadamard(const Tensor& a, const Tensor& b);

Tensor softmax(const Tensor& x);
// dy is the gradient at the softmax output y.
Tensor softmax_backward(const Tensor& y, const Tensor& dy);

// loss = -log softmax(logits)[target]
double cross_entropy(const Tensor& logits, int target);
// gradient at the logits: softmax(logits) - onehot(target)
Tensor cross_entropy_grad(const Tensor& logits, int target);

}  // namespace afford
