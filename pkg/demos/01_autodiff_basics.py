"""A tour of the tensor core: forward ops, the gradient tape, and a
finite-difference cross-check.

Run with:  python demos/01_autodiff_basics.py
"""

import numpy as np

from dcs import GradTape, Tensor, backward, log_softmax, matmul, relu, softmax

# Tensors wrap float64 numpy arrays. Only tensors created with
# requires_grad=True (and anything computed from them) participate in
# backpropagation.
x = Tensor(np.array([[1.0, -2.0, 3.0]]), requires_grad=True)
w = Tensor(np.array([[0.5, -0.1], [0.2, 0.4], [-0.3, 0.8]]), requires_grad=True)

# Nothing is recorded outside a tape, so plain evaluation is free of
# bookkeeping. Training code opens one tape per forward/backward pass.
with GradTape() as tape:
    logits = matmul(relu(x), w)
    loss = -log_softmax(logits, 1.0).sum(axis=1).mean()
    backward(loss)

print("loss:", loss.item())
print("recorded ops on the tape:", len(tape))
print("dL/dw:\n", w.grad)

# Sanity-check the tape gradient against central finite differences.
h = 1e-5
numeric = np.zeros_like(w.data)
for i in range(w.data.shape[0]):
    for j in range(w.data.shape[1]):
        def value(delta):
            shifted = w.data.copy()
            shifted[i, j] += delta
            out = matmul(relu(Tensor(x.data)), Tensor(shifted))
            return -log_softmax(out, 1.0).sum(axis=1).mean().item()

        numeric[i, j] = (value(h) - value(-h)) / (2 * h)

print("max |analytic - numeric|:", np.abs(w.grad - numeric).max())

# Softmax is evaluated with max-subtraction, so even extreme logits stay
# finite and sum to one.
extreme = softmax(Tensor([500.0, -500.0, 0.0]))
print("softmax([500, -500, 0]) =", extreme.data, "sum:", extreme.data.sum())
