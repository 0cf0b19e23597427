#pragma once

#include "qpinem/numerics.hpp"

namespace qpinem {

/**
 * Fock-basis matrix element <n| exp(a A^dag - a* A) |n'> of a displacement by
 * the complex amplitude `a`:
 *
 *   e^{-|a|^2/2} a^{n-n'} sqrt(n! n'!) sum_r (-|a|^2)^r / [r! (n'-r)! (r+n-n')!]
 *
 * with r running from max(0, n'-n) to n'. For small min(n, n') |a|^2 the sum
 * is evaluated directly in log space. Otherwise the alternating sum cancels
 * badly and the element is obtained from the normalized three-term Laguerre
 * recurrence along the diagonal n - n', which is stable in that regime.
 *
 * The same evaluator gives the electron-photon scattering amplitudes when `a`
 * is the quantum coupling, since the scattering operator acts on each
 * conserved k+n block as a displacement by that coupling.
 */
Complex displacement_element(Complex a, int n, int n_prime);

/** The (n_max + 1) x (n_max + 1) block of displacement elements, in O(n_max^2). */
Matrix displacement_block(Complex a, int n_max);

}  // namespace qpinem
