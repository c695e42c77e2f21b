#pragma once

#include "fhn/config.hpp"
#include "fhn/dynamics.hpp"
#include "fhn/greens.hpp"
#include "fhn/reference_pde.hpp"
#include "fhn/spectral.hpp"
#include "fhn/wave.hpp"

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>

namespace fhn {

/// Shared state of a run: the configuration plus lazily computed pulses,
/// operators and kernel elements, each built once per (h, degree).
class Pipeline {
public:
    using Logger = std::function<void(const std::string&)>;

    explicit Pipeline(RunConfig cfg, Logger log = {});

    const RunConfig& config() const { return cfg_; }
    const CouplingKernel& kernel() const { return kernel_; }
    const ModelParams& params() const { return cfg_.model; }

    // PDE pulse: read from seeds.pde_profile if set, else seed evolution + Newton.
    const WaveProfile& pde_pulse();
    bool pde_resumed() const { return pde_resumed_; }
    const SeedResult* seed_result() const { return seed_ ? &*seed_ : nullptr; }

    const ContinuationRun& continuation();
    const WaveProfile& lattice_pulse(double h, int degree);

    struct Linearization {
        OperatorMatrix Lh;
        KernelElements ke;
        KernelFields kf;
    };
    const Linearization& linearization(double h, int degree);

    // Strip scan at (spectrum.h, spectrum.degree): lambda = 0 plus the probe grid.
    const SpectralScanReport& spectral_scan();
    // Direct temporal Green's functions at (green.h, green.degree) for every
    // source and fit time, decomposed into E + Gtilde, and the decay fit of Gtilde.
    const std::vector<TemporalGreen>& green_records();
    const DecompositionReport& gtilde_fit();
    std::vector<long> green_sources();

    void log(const std::string& msg) const
    {
        if (log_) log_(msg);
    }

private:
    using Key = std::pair<long, int>;
    static Key key(double h, int degree) { return {std::lround(h * 1e9), degree}; }

    RunConfig cfg_;
    CouplingKernel kernel_;
    Logger log_;
    std::optional<WaveProfile> pde_;
    std::optional<SeedResult> seed_;
    bool pde_resumed_ = false;
    std::optional<ContinuationRun> cont_;
    std::map<Key, WaveProfile> lattice_;
    std::map<Key, std::unique_ptr<Linearization>> lin_;
    std::optional<SpectralScanReport> scan_;
    std::optional<std::vector<TemporalGreen>> records_;
    std::optional<DecompositionReport> gfit_;
};

// lambda = 0 followed by the strip grid Re in [-lambda~, lambda1], |Im| < pi c / h.
std::vector<cd> spectrum_probe_grid(const RunConfig& cfg, const WaveProfile& q);

// Lattice site nearest to the pulse peak.
long peak_site(const WaveProfile& p);

} // namespace fhn
