#pragma once

#include "fhn/pipeline.hpp"

namespace fhn::testing {

// One default-config pipeline per test binary; pulses are cached inside it.
inline Pipeline& shared_pipeline()
{
    static Pipeline pl{RunConfig{}};
    return pl;
}

// A smooth, pulse-like profile on a small lattice (not a solution): Green's
// function identities hold for any coefficient function.
inline WaveProfile synthetic_profile(double L, double h, int degree, double c)
{
    WaveProfile p;
    p.mesh = ElementMesh(L, static_cast<int>(std::lround(2.0 * L / h)), degree);
    p.u = p.mesh.sample([](double x) { return 0.85 * std::exp(-x * x / 8.0); });
    p.w = p.mesh.sample([](double x) { return 0.12 * std::exp(-(x - 3.0) * (x - 3.0) / 20.0); });
    p.c = c;
    p.h = h;
    return p;
}

} // namespace fhn::testing
