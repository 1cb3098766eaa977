#pragma once

#include "simhaystack/image.hpp"

namespace simhaystack {

/// Orthonormal 2-D DCT-II of a square plane (side >= 2).
/// Coefficient (0, 0) is the DC term: N * mean for an N x N plane.
FloatPlane dct2(const FloatPlane& plane);

/// Exact inverse of dct2 (orthonormal DCT-III).
FloatPlane idct2(const FloatPlane& coefficients);

/// Multi-level orthonormal Haar decomposition in the Mallat layout: each level
/// transforms the current top-left LL block, writing LL | HL over LH | HH.
/// Both sides must be divisible by 2^levels.
FloatPlane haar_dwt(const FloatPlane& plane, int levels);

/// Inverse of haar_dwt with the same level count.
FloatPlane inverse_haar_dwt(const FloatPlane& coefficients, int levels);

}  // namespace simhaystack
