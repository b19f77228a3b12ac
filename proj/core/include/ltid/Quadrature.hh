//------------------------------- -*- C++ -*- -------------------------------//
// SPDX-License-Identifier: Apache-2.0
//---------------------------------------------------------------------------//
//! \file ltid/Quadrature.hh
//---------------------------------------------------------------------------//
#pragma once

#include <cmath>
#include <vector>

namespace ltid
{
//---------------------------------------------------------------------------//
struct GaussRule
{
    std::vector<double> nodes;
    std::vector<double> weights;
};

//! Gauss-Legendre rule on [-1, 1]
GaussRule gauss_legendre(int n);

//---------------------------------------------------------------------------//
/*!
 * Composite Simpson rule over [a, b] with panel width at most \c max_step.
 */
template<class F>
double simpson(F&& f, double a, double b, double max_step)
{
    double len = b - a;
    if (len <= 0)
        return 0;
    int n = 2 * static_cast<int>(std::ceil(len / (2 * max_step)));
    if (n < 2)
        n = 2;
    double step = len / n;
    double sum = f(a) + f(b);
    for (int i = 1; i < n; ++i)
    {
        sum += (i % 2 ? 4 : 2) * f(a + i * step);
    }
    return sum * step / 3;
}

//---------------------------------------------------------------------------//
}  // namespace ltid
