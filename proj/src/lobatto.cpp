#include "fhn/lobatto.hpp"

#include "fhn/errors.hpp"

#include <cmath>
#include <numbers>

namespace fhn {

namespace {

// Legendre P_n and P_n' at x via the three-term recurrence.
void legendre(int n, double x, double& P, double& dP)
{
    double p0 = 1.0, p1 = x;
    if (n == 0) {
        P = 1.0;
        dP = 0.0;
        return;
    }
    for (int k = 2; k <= n; ++k) {
        double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    P = p1;
    dP = n * (x * p1 - p0) / (x * x - 1.0);
}

} // namespace

LobattoRule make_lobatto(int p)
{
    require(p >= 1 && p <= 64, "Lobatto degree out of range");
    LobattoRule r;
    r.p = p;
    r.x.resize(p + 1);
    r.w.resize(p + 1);
    r.x(0) = -1.0;
    r.x(p) = 1.0;
    // interior nodes are roots of P_p'; Newton from Chebyshev-Gauss-Lobatto guesses
    for (int i = 1; i < p; ++i) {
        double x = -std::cos(std::numbers::pi * i / p);
        for (int it = 0; it < 100; ++it) {
            // roots of (1 - x^2) P_p' ; use q = P_{p+1} - P_{p-1} which shares them
            double Pp, dPp, Pm, dPm, Pn, dPn;
            legendre(p + 1, x, Pn, dPn);
            legendre(p - 1, x, Pm, dPm);
            legendre(p, x, Pp, dPp);
            double q = Pn - Pm;
            double dq = dPn - dPm;
            double dx = q / dq;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        r.x(i) = x;
    }
    for (int i = 0; i <= p; ++i) {
        double P, dP;
        legendre(p, r.x(i), P, dP);
        r.w(i) = 2.0 / (p * (p + 1.0) * P * P);
    }
    r.bary.resize(p + 1);
    for (int j = 0; j <= p; ++j) {
        double prod = 1.0;
        for (int k = 0; k <= p; ++k)
            if (k != j) prod *= r.x(j) - r.x(k);
        r.bary(j) = 1.0 / prod;
    }
    r.D.resize(p + 1, p + 1);
    for (int i = 0; i <= p; ++i) {
        double diag = 0.0;
        for (int j = 0; j <= p; ++j) {
            if (i == j) continue;
            r.D(i, j) = (r.bary(j) / r.bary(i)) / (r.x(i) - r.x(j));
            diag -= r.D(i, j);
        }
        r.D(i, i) = diag; // negative-sum trick keeps D * 1 = 0 to roundoff
    }
    return r;
}

} // namespace fhn
