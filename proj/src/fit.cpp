#include "fhn/fit.hpp"

#include <cmath>

namespace fhn {

LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y)
{
    LinearFit f;
    f.n = static_cast<int>(x.size());
    if (f.n < 2) return f;
    double mx = 0, my = 0;
    for (int i = 0; i < f.n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= f.n;
    my /= f.n;
    double sxx = 0, sxy = 0;
    for (int i = 0; i < f.n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    f.slope = sxx > 0 ? sxy / sxx : 0.0;
    f.intercept = my - f.slope * mx;
    return f;
}

DecayFit fit_decay(const std::vector<double>& s, const std::vector<double>& v, double floor)
{
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < s.size(); ++i)
        if (std::abs(v[i]) > floor) {
            xs.push_back(s[i]);
            ys.push_back(std::log(std::abs(v[i])));
        }
    auto lf = linear_fit(xs, ys);
    return {-lf.slope, std::exp(lf.intercept), lf.n};
}

} // namespace fhn
