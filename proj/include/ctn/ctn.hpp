#ifndef CTN_CTN_HPP
#define CTN_CTN_HPP

#include "errors.hpp"
#include "torus.hpp"
#include "kernels.hpp"
#include "quadrature.hpp"
#include "multiplier.hpp"
#include "certify.hpp"
#include "neumann.hpp"
#include "yamabe.hpp"
#include "io.hpp"

#endif
