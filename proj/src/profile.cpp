#include "fhn/profile.hpp"

#include "fhn/errors.hpp"

#include <fmt/format.h>
#include <fmt/os.h>

#include <cmath>
#include <fstream>
#include <sstream>

namespace fhn {

std::pair<double, double> WaveProfile::eval_derivative(double xi) const
{
    auto [e, s] = mesh.locate(xi);
    auto seg = [&](const Eigen::VectorXd& v) {
        Eigen::VectorXd d = mesh.rule.D * v.segment(mesh.index(e, 0), mesh.npe()) / mesh.J();
        return mesh.rule.interpolate(d, s);
    };
    return {seg(u), seg(w)};
}

WaveProfile WaveProfile::shifted(double shift) const
{
    WaveProfile out = *this;
    out.u = mesh.sample([&](double x) { return mesh.eval(u, x + shift); });
    out.w = mesh.sample([&](double x) { return mesh.eval(w, x + shift); });
    return out;
}

WaveProfile WaveProfile::resampled(const ElementMesh& target) const
{
    WaveProfile out = *this;
    out.mesh = target;
    out.u = target.sample([&](double x) { return mesh.eval(u, x); });
    out.w = target.sample([&](double x) { return mesh.eval(w, x); });
    return out;
}

double WaveProfile::peak_position() const
{
    Eigen::Index k;
    u.maxCoeff(&k);
    double x0 = mesh.nodes()(k);
    // golden section on the interpolant around the best node
    double a = x0 - mesh.H(), b = x0 + mesh.H();
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    double c1 = b - g * (b - a), c2 = a + g * (b - a);
    double f1 = mesh.eval(u, c1), f2 = mesh.eval(u, c2);
    while (b - a > 1e-12) {
        if (f1 > f2) {
            b = c2; c2 = c1; f2 = f1;
            c1 = b - g * (b - a); f1 = mesh.eval(u, c1);
        } else {
            a = c1; c1 = c2; f1 = f2;
            c2 = a + g * (b - a); f2 = mesh.eval(u, c2);
        }
    }
    return 0.5 * (a + b);
}

UniformSamples sample_uniform(const WaveProfile& p, double d)
{
    long n = std::lround(2.0 * p.L() / d);
    require(std::abs(n * d - 2.0 * p.L()) < 1e-9, "d must divide the domain length 2L");
    UniformSamples s;
    s.xi.resize(n);
    s.u.resize(n);
    s.w.resize(n);
    for (long i = 0; i < n; ++i) {
        double x = -p.L() + i * d;
        s.xi(i) = x;
        auto [u, w] = p.eval(x);
        s.u(i) = u;
        s.w(i) = w;
    }
    return s;
}

double h1_distance(const WaveProfile& a, const WaveProfile& b, double d)
{
    require(std::abs(a.L() - b.L()) < 1e-12, "profiles on different domains");
    auto sa = sample_uniform(a, d), sb = sample_uniform(b, d);
    Eigen::VectorXd du = sa.u - sb.u, dw = sa.w - sb.w;
    const long n = du.size();
    double s0 = du.squaredNorm() + dw.squaredNorm();
    double s1 = 0.0;
    for (long i = 0; i < n; ++i) {
        long j = (i + 1) % n;
        s1 += std::pow((du(j) - du(i)) / d, 2) + std::pow((dw(j) - dw(i)) / d, 2);
    }
    return std::sqrt(d * (s0 + s1));
}

void write_profile_csv(const WaveProfile& p, double d, const std::string& path)
{
    auto s = sample_uniform(p, d);
    auto out = fmt::output_file(path);
    out.print("# params,r0={:.17g},rho={:.17g},gamma={:.17g}\n", p.params.r0, p.params.rho, p.params.gamma);
    out.print("# L,{:.17g}\n# d,{:.17g}\n# c,{:.17g}\n# residual_norm,{:.6e}\n# h,{:.17g}\n", p.L(), d, p.c,
              p.residual_norm, p.h);
    out.print("xi,u,w\n");
    for (long i = 0; i < s.xi.size(); ++i) out.print("{:.10f},{:.17g},{:.17g}\n", s.xi(i), s.u(i), s.w(i));
}

void write_profile_nodes(const WaveProfile& p, const std::string& path)
{
    auto out = fmt::output_file(path);
    out.print("# {:.17g} {} {} {:.17g} {:.17g} {:.17g} {:.17g} {:.17g} {:.17g}\n", p.L(), p.mesh.E, p.mesh.p(), p.c,
              p.residual_norm, p.h, p.params.r0, p.params.rho, p.params.gamma);
    out.print("xi,u,w\n");
    auto x = p.mesh.nodes();
    for (long i = 0; i < x.size(); ++i) out.print("{:.17g},{:.17g},{:.17g}\n", x(i), p.u(i), p.w(i));
}

WaveProfile read_profile_nodes(const std::string& path)
{
    std::ifstream in(path);
    require(bool(in), "cannot open profile file " + path);
    std::string line;
    std::getline(in, line);
    std::istringstream hs(line.substr(1));
    double L;
    int E, deg;
    WaveProfile p;
    hs >> L >> E >> deg >> p.c >> p.residual_norm >> p.h >> p.params.r0 >> p.params.rho >> p.params.gamma;
    require(bool(hs), "malformed profile header in " + path);
    p.mesh = ElementMesh(L, E, deg);
    std::getline(in, line);
    p.u.resize(p.mesh.size());
    p.w.resize(p.mesh.size());
    for (int i = 0; i < p.mesh.size(); ++i) {
        require(bool(std::getline(in, line)), "truncated profile file " + path);
        double x;
        char c1, c2;
        std::istringstream ls(line);
        ls >> x >> c1 >> p.u(i) >> c2 >> p.w(i);
    }
    return p;
}

} // namespace fhn
