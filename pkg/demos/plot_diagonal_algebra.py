"""
Operators as stacks of diagonals
================================

An operator on block sequences is stored by its diagonals. Diagonal ``n``
holds the blocks at positions ``(i - n, i)``, so positive offsets sit above
the main diagonal.
"""

import numpy as np

from nswiener import IndexWindow, NSOperator, identity, multiply, norms, render, shift

###############################################################################
# Two scalar operators with a single superdiagonal each
w = IndexWindow(0, 2)
D1 = NSOperator.from_arrays(w, {1: np.array([1.0, 2.0, 3.0]).reshape(3, 1, 1)})
D2 = NSOperator.from_arrays(w, {1: np.array([4.0, 5.0, 6.0]).reshape(3, 1, 1)})

P = multiply(D1, D2)
print(P)
print("offset 2 of the product:", P.diagonal(2).blocks.ravel().real)

###############################################################################
# The block at column 0 of the product needs row -1 of D1, which lies outside
# the window and is zero. The algebra is exact, so nothing is lost when the
# window is small: only the dense picture is cut.
print(render(P, IndexWindow(-2, 2), check=False).data.real)

###############################################################################
# Shifts and adjoints. Z moves a sequence one step back; its adjoint is the
# forward shift, and the window grows to hold both.
Z = shift(2, IndexWindow(0, 4))
print("Z  support", Z.support, "window", Z.window)
print("Z* support", Z.H.support, "window", Z.H.window)

###############################################################################
# Norms. The Wiener norm adds the largest block norm of every diagonal.
F = identity(2, IndexWindow(0, 9)) + shift(2, IndexWindow(0, 9)) * 0.5
print(norms(F).as_dict())
