#pragma once

namespace sqg::spectral {

// Convolution kernel of S in physical space,
//   S(a) = -(1 / 8 pi) (1 + 3 cos 2a) log(1 - cos a).
// Logarithmically singular at a = 0 mod 2 pi (DomainError there).
double kernel_S(double alpha);

}  // namespace sqg::spectral
