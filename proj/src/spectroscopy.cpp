#include "rsc/spectroscopy.hpp"
#include "rsc/parallel.hpp"

#include <unsupported/Eigen/LevenbergMarquardt>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <optional>
#include <random>
#include <unordered_map>

namespace rsc {

bool Spectrum::sampled() const
{
  return !points.empty() && std::all_of(points.begin(), points.end(), [](const auto& p) { return p.trials > 0; });
}

void Spectrum::validate() const
{
  for (const auto& p : points) {
    if (!std::isfinite(p.detuning_hz))
      throw DomainError("spectrum detuning must be finite");
    if (p.trials < 0 || p.successes < 0 || p.successes > p.trials)
      throw DomainError("spectrum point needs 0 <= successes <= trials");
    if (!(p.survival >= 0.0 && p.survival <= 1.0))
      throw DomainError("spectrum survival must lie in [0, 1]");
  }
}

void DetectionModel::validate() const
{
  for (double p : {microwave_pi_fidelity, blowaway_survival_F3, blowaway_survival_F4})
    if (!(p >= 0.0 && p <= 1.0))
      throw DomainError("detection probabilities must lie in [0, 1]");
  if (trials_per_point < 1)
    throw DomainError("detection needs at least one trial per point");
}

double DetectionModel::stay_probability(double survival) const
{
  // Lower-state atoms reach F = 3 with the microwave fidelity; transferred atoms stay in F = 4.
  const double lower = microwave_pi_fidelity * blowaway_survival_F3 + (1.0 - microwave_pi_fidelity) * blowaway_survival_F4;
  return survival * lower + (1.0 - survival) * blowaway_survival_F4;
}

std::vector<double> sideband_grid_hz(double trap_frequency, int points_per_trap_frequency)
{
  if (!(trap_frequency > 0) || points_per_trap_frequency < 1)
    throw DomainError("sideband grid needs a positive trap frequency and resolution");
  const double omega_hz = hz_from_angular(trap_frequency);
  const int half = 2 * points_per_trap_frequency;
  std::vector<double> grid;
  grid.reserve(2 * half + 1);
  for (int i = -half; i <= half; ++i)
    grid.push_back(omega_hz * i / points_per_trap_frequency);
  return grid;
}

SidebandResponse sideband_response(const RamanPulse<double>& probe, const std::vector<double>& detuning_hz,
                                   int n_max)
{
  probe.validate();
  if (n_max < 1)
    throw DomainError("sideband response needs n_max >= 1");
  const double peak = std::abs(probe.envelope.peak_rabi);
  const double omega = probe.trap_frequency;

  // Red at n and blue at n - 1 share a Rabi frequency, and the response is even
  // in detuning, so many (|detuning|, Rabi) pairs repeat across the grid.
  struct Key {
    long long detuning;
    std::uint64_t rabi;
    bool operator==(const Key&) const = default;
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const
    {
      return std::hash<long long>()(k.detuning) ^ (std::hash<std::uint64_t>()(k.rabi) * 0x9E3779B97F4A7C15ull);
    }
  };
  std::unordered_map<Key, std::size_t, KeyHash> slots;
  std::vector<std::pair<double, double>> jobs; // (detuning, rabi)
  auto slot = [&](double detuning, double rabi) -> std::size_t {
    std::uint64_t bits;
    std::memcpy(&bits, &rabi, sizeof bits);
    const Key key{std::llround(std::abs(detuning) * 1e3), bits};
    auto [it, inserted] = slots.emplace(key, jobs.size());
    if (inserted)
      jobs.emplace_back(std::abs(detuning), rabi);
    return it->second;
  };

  const std::size_t rows = detuning_hz.size();
  const std::size_t cols = static_cast<std::size_t>(n_max) + 1;
  constexpr std::size_t none = std::numeric_limits<std::size_t>::max();
  std::vector<std::array<std::size_t, 3>> index_of(rows * cols, {none, none, none});
  for (std::size_t i = 0; i < rows; ++i) {
    const double delta = angular_from_hz(detuning_hz[i]) + probe.detuning;
    for (std::size_t n = 0; n < cols; ++n) {
      auto& ids = index_of[i * cols + n];
      const int ni = static_cast<int>(n);
      if (n > 0)
        ids[0] = slot(delta + omega, sideband_rabi(peak, probe.eta, ni, -1));
      ids[1] = slot(delta, std::abs(sideband_rabi(peak, probe.eta, ni, 0)));
      ids[2] = slot(delta - omega, sideband_rabi(peak, probe.eta, ni, 1));
    }
  }

  // Spectra are compared against shot noise of order 1e-2; a looser local error
  // bound than the propagator default keeps full scans cheap.
  const PropagatorOptions<double> options{1e-8};
  std::vector<double> values(jobs.size());
  parallel_for(jobs.size(), [&](std::size_t j) {
    Envelope<double> e = probe.envelope;
    e.peak_rabi = jobs[j].second;
    values[j] = transfer_probability(e, jobs[j].first, options);
  });

  SidebandResponse out{detuning_hz, Eigen::MatrixXd::Zero(rows, cols), probe.axis};
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t n = 0; n < cols; ++n) {
      double stay = 1.0;
      for (std::size_t id : index_of[i * cols + n])
        if (id != none)
          stay *= 1.0 - values[id];
      out.transfer(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(n)) = 1.0 - stay;
    }
  return out;
}

Spectrum spectrum_from_response(const SidebandResponse& response, const Distribution& dist)
{
  if (dist.axis != response.axis)
    throw DomainError("distribution axis does not match the probe axis");
  if (dist.probs.size() > response.transfer.cols())
    throw DomainError("response matrix truncation is smaller than the distribution");
  const Eigen::VectorXd transfer = response.transfer.leftCols(dist.probs.size()) * dist.probs;
  Spectrum s;
  s.axis = dist.axis;
  for (std::size_t i = 0; i < response.detuning_hz.size(); ++i)
    s.points.push_back({response.detuning_hz[i], std::clamp(1.0 - transfer[static_cast<Eigen::Index>(i)], 0.0, 1.0), 0, 0});
  s.metadata["convention"] = "survival = population left in the lower state";
  s.metadata["nbar_true"] = std::to_string(dist.mean());
  return s;
}

Spectrum scan_sideband_spectrum(const Distribution& dist, const RamanPulse<double>& probe,
                                const std::vector<double>& detuning_hz)
{
  if (dist.axis != probe.axis)
    throw DomainError("distribution axis does not match the probe axis");
  return spectrum_from_response(sideband_response(probe, detuning_hz, dist.n_max()), dist);
}

Spectrum simulate_detection(const Spectrum& noiseless, const DetectionModel& detection, std::uint64_t seed)
{
  detection.validate();
  noiseless.validate();
  Spectrum out = noiseless;
  std::mt19937_64 rng(seed);
  for (auto& p : out.points) {
    std::binomial_distribution<long> draw(detection.trials_per_point, detection.stay_probability(p.survival));
    p.trials = detection.trials_per_point;
    p.successes = draw(rng);
    p.survival = static_cast<double>(p.successes) / static_cast<double>(p.trials);
  }
  out.metadata["detection_seed"] = std::to_string(seed);
  return out;
}

double nbar_from_fitted_ratio(double ratio)
{
  if (!(ratio < 1.0))
    return std::numeric_limits<double>::infinity();
  return std::max(0.0, ratio) / (1.0 - std::max(0.0, ratio));
}

namespace {

// Parameters (detunings in kHz): baseline, A_red, A_carrier, A_blue, carrier
// centre, sideband offset, sideband width, carrier width.
enum Param { kBase, kRed, kCarrier, kBlue, kCentre, kOffset, kSideWidth, kCarrierWidth, kParams };

// With a fixed baseline the optimiser sees kParams - 1 values (no kBase).
struct PeakModel : Eigen::DenseFunctor<double> {
  const Eigen::VectorXd& x;
  const Eigen::VectorXd& y;
  std::optional<double> baseline;

  PeakModel(const Eigen::VectorXd& x_khz, const Eigen::VectorXd& data, std::optional<double> fixed_baseline)
      : Eigen::DenseFunctor<double>(fixed_baseline ? kParams - 1 : kParams, static_cast<int>(x_khz.size())),
        x(x_khz), y(data), baseline(fixed_baseline)
  {
  }

  Eigen::VectorXd full(const Eigen::VectorXd& q) const
  {
    if (!baseline)
      return q;
    Eigen::VectorXd p(kParams);
    p[kBase] = *baseline;
    p.tail(kParams - 1) = q;
    return p;
  }

  Eigen::VectorXd reduced(const Eigen::VectorXd& p) const
  {
    if (!baseline)
      return p;
    return p.tail(kParams - 1);
  }

  static double gauss(double d, double s) { return std::exp(-d * d / (2.0 * s * s)); }

  int operator()(const Eigen::VectorXd& q, Eigen::VectorXd& f) const
  {
    const Eigen::VectorXd p = full(q);
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      const double dr = x[i] - (p[kCentre] - p[kOffset]);
      const double dc = x[i] - p[kCentre];
      const double db = x[i] - (p[kCentre] + p[kOffset]);
      f[i] = p[kBase] + p[kRed] * gauss(dr, p[kSideWidth]) + p[kCarrier] * gauss(dc, p[kCarrierWidth]) +
             p[kBlue] * gauss(db, p[kSideWidth]) - y[i];
    }
    return 0;
  }

  int df(const Eigen::VectorXd& q, Eigen::MatrixXd& jac) const
  {
    const Eigen::VectorXd p = full(q);
    Eigen::MatrixXd j(x.size(), kParams);
    const double ss = p[kSideWidth], sc = p[kCarrierWidth];
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      const double dr = x[i] - (p[kCentre] - p[kOffset]);
      const double dc = x[i] - p[kCentre];
      const double db = x[i] - (p[kCentre] + p[kOffset]);
      const double gr = gauss(dr, ss), gc = gauss(dc, sc), gb = gauss(db, ss);
      const double tr = p[kRed] * gr, tc = p[kCarrier] * gc, tb = p[kBlue] * gb;
      j(i, kBase) = 1.0;
      j(i, kRed) = gr;
      j(i, kCarrier) = gc;
      j(i, kBlue) = gb;
      j(i, kCentre) = tr * dr / (ss * ss) + tc * dc / (sc * sc) + tb * db / (ss * ss);
      j(i, kOffset) = -tr * dr / (ss * ss) + tb * db / (ss * ss);
      j(i, kSideWidth) = (tr * dr * dr + tb * db * db) / (ss * ss * ss);
      j(i, kCarrierWidth) = tc * dc * dc / (sc * sc * sc);
    }
    jac = baseline ? Eigen::MatrixXd(j.rightCols(kParams - 1)) : j;
    return 0;
  }
};

struct PeakFit {
  Eigen::VectorXd params;
  double residual_norm = 0.0;
  int evaluations = 0;
};

// Mean transferred population in the peak-free wings beyond 1.5 omega, or
// nothing when the grid does not reach that far.
std::optional<double> wing_baseline(const Eigen::VectorXd& x_khz, const Eigen::VectorXd& y, double omega_khz)
{
  double sum = 0.0;
  int count = 0;
  for (Eigen::Index i = 0; i < x_khz.size(); ++i)
    if (std::abs(x_khz[i]) > 1.5 * omega_khz) {
      sum += y[i];
      ++count;
    }
  if (count < 5)
    return std::nullopt;
  return sum / count;
}

PeakFit fit_peaks(const Eigen::VectorXd& x_khz, const Eigen::VectorXd& y, const Eigen::VectorXd& start,
                  std::optional<double> baseline)
{
  PeakModel model(x_khz, y, baseline);
  Eigen::LevenbergMarquardt<PeakModel> lm(model);
  lm.setXtol(1e-12);
  lm.setFtol(1e-12);
  lm.setMaxfev(2000);
  Eigen::VectorXd q = model.reduced(start);
  const auto status = lm.minimize(q);
  using Eigen::LevenbergMarquardtSpace::Status;
  if (status == Status::ImproperInputParameters || !q.allFinite())
    throw FitError("peak fit did not converge");
  if (status == Status::TooManyFunctionEvaluation)
    throw FitError("peak fit exceeded its evaluation budget");
  Eigen::VectorXd p = model.full(q);
  p[kSideWidth] = std::abs(p[kSideWidth]);
  p[kCarrierWidth] = std::abs(p[kCarrierWidth]);
  Eigen::VectorXd r(x_khz.size());
  model(q, r);
  return {p, r.norm(), static_cast<int>(lm.nfev())};
}

double value_near(const Eigen::VectorXd& x, const Eigen::VectorXd& y, double target)
{
  Eigen::Index best = 0;
  (x.array() - target).abs().minCoeff(&best);
  return y[best];
}

double percentile(std::vector<double> v, double q)
{
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  const double w = pos - static_cast<double>(lo);
  if (w == 0.0 || v[lo] == v[hi])
    return v[lo];
  return v[lo] + w * (v[hi] - v[lo]);
}

} // namespace

ThermometryResult fit_spectrum(const Spectrum& spectrum, double omega_guess, const FitOptions& options)
{
  spectrum.validate();
  if (!(omega_guess > 0))
    throw DomainError("fit needs a positive trap frequency guess");
  if (options.bootstrap_resamples < 0 || !(options.confidence > 0 && options.confidence < 1))
    throw DomainError("invalid bootstrap settings");

  const double omega_khz = hz_from_angular(omega_guess) / 1e3;
  const auto n = static_cast<Eigen::Index>(spectrum.points.size());
  Eigen::VectorXd x(n), y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    x[i] = spectrum.points[static_cast<std::size_t>(i)].detuning_hz / 1e3;
    y[i] = 1.0 - spectrum.points[static_cast<std::size_t>(i)].survival;
  }
  double half_width = 0.25 * omega_khz;
  for (double c : {-omega_khz, 0.0, omega_khz}) {
    const auto near = ((x.array() - c).abs() <= half_width).count();
    if (near < 5)
      throw FitError("fewer than five spectrum points near the peak at " + std::to_string(c) + " kHz");
  }

  double width = options.width_guess_hz / 1e3;
  if (!(width > 0))
    width = options.probe_tau > 0 ? 1.0 / (4.0 * constants::pi * options.probe_tau) / 1e3 : omega_khz / 8.0;

  Eigen::VectorXd start(kParams);
  const double base = std::min(value_near(x, y, -2.0 * omega_khz), value_near(x, y, 2.0 * omega_khz));
  start << base, value_near(x, y, -omega_khz) - base, value_near(x, y, 0.0) - base, value_near(x, y, omega_khz) - base,
      0.0, omega_khz, width, width;
  const std::optional<double> base_fixed = wing_baseline(x, y, omega_khz);
  if (base_fixed)
    start[kBase] = *base_fixed;
  const PeakFit central = fit_peaks(x, y, start, base_fixed);
  const Eigen::VectorXd& p = central.params;
  if (std::abs(p[kOffset] - omega_khz) > 0.25 * omega_khz || std::abs(p[kCentre]) > 0.25 * omega_khz)
    throw FitError("fitted peak positions moved away from the expected sidebands");
  if (!(p[kBlue] > 0))
    throw FitError("fitted blue sideband amplitude is not positive");

  ThermometryResult r;
  r.axis = spectrum.axis;
  r.ratio = p[kRed] / p[kBlue];
  r.nbar.value = nbar_from_fitted_ratio(r.ratio);
  r.nbar_lower_bound = !(r.ratio < 1.0);
  r.trap_frequency = angular_from_hz(p[kOffset] * 1e3);
  r.diagnostics.residual_norm = central.residual_norm;
  r.diagnostics.centers_hz = {(p[kCentre] - p[kOffset]) * 1e3, p[kCentre] * 1e3, (p[kCentre] + p[kOffset]) * 1e3};
  r.diagnostics.amplitudes = {p[kRed], p[kCarrier], p[kBlue]};
  r.diagnostics.widths_hz = {p[kSideWidth] * 1e3, p[kCarrierWidth] * 1e3};
  r.diagnostics.baseline = p[kBase];
  r.diagnostics.evaluations = central.evaluations;

  if (spectrum.sampled() && options.bootstrap_resamples > 0) {
    const int resamples = options.bootstrap_resamples;
    std::vector<double> ratios(static_cast<std::size_t>(resamples), std::numeric_limits<double>::quiet_NaN());
    parallel_for(ratios.size(), [&](std::size_t k) {
      std::mt19937_64 rng(derive_seed(options.seed, k));
      Eigen::VectorXd yb(n);
      for (Eigen::Index i = 0; i < n; ++i) {
        const auto& pt = spectrum.points[static_cast<std::size_t>(i)];
        const double q = static_cast<double>(pt.successes) / static_cast<double>(pt.trials);
        std::binomial_distribution<long> draw(pt.trials, q);
        yb[i] = 1.0 - static_cast<double>(draw(rng)) / static_cast<double>(pt.trials);
      }
      try {
        const PeakFit b = fit_peaks(x, yb, p, base_fixed ? wing_baseline(x, yb, omega_khz) : std::nullopt);
        if (b.params[kBlue] > 0)
          ratios[k] = b.params[kRed] / b.params[kBlue];
        else
          ratios[k] = std::numeric_limits<double>::infinity();
      } catch (const FitError&) {
      }
    });
    // Failed refits are dropped; a ratio interval maps monotonically onto nbar.
    std::vector<double> ok;
    for (double v : ratios)
      if (!std::isnan(v))
        ok.push_back(v);
    if (ok.size() < ratios.size() / 2)
      throw FitError("more than half of the bootstrap refits failed");
    const double alpha = 0.5 * (1.0 - options.confidence);
    const double lo = nbar_from_fitted_ratio(percentile(ok, alpha));
    const double hi = nbar_from_fitted_ratio(percentile(ok, 1.0 - alpha));
    r.nbar_interval = {std::min(lo, r.nbar.value), std::max(hi, r.nbar.value)};
    r.nbar.err_minus = std::isfinite(r.nbar.value) ? r.nbar.value - r.nbar_interval[0] : 0.0;
    r.nbar.err_plus = std::isfinite(r.nbar.value) ? r.nbar_interval[1] - r.nbar.value : 0.0;
    r.diagnostics.bootstrap_resamples = static_cast<int>(ok.size());
  }

  const double omega = r.trap_frequency;
  if (std::isfinite(r.nbar.value)) {
    r.temperature = temperature_from_nbar(r.nbar.value, omega);
    r.temperature_classical = temperature_classical(r.nbar.value, omega);
  } else {
    r.temperature = r.temperature_classical = std::numeric_limits<double>::infinity();
  }
  if (!(spectrum.sampled() && options.bootstrap_resamples > 0))
    r.nbar_interval = {r.nbar.value, r.nbar.value};
  const double p0 = 1.0 / (r.nbar.value + 1.0);
  r.ground_state_population.value = p0;
  r.ground_state_population.err_plus = 1.0 / (r.nbar_interval[0] + 1.0) - p0;
  r.ground_state_population.err_minus = p0 - 1.0 / (r.nbar_interval[1] + 1.0);
  return r;
}

double ground_population_3d(const AxisArray& nbars)
{
  double p = 1.0;
  for (double nb : nbars) {
    if (nb < 0)
      throw DomainError("nbar must be non-negative");
    p /= nb + 1.0;
  }
  return p;
}

ThreeAxisReport three_axis_report(const std::array<ThermometryResult, 3>& results)
{
  ThreeAxisReport rep;
  rep.axes = results;
  AxisArray nb{}, lo{}, hi{};
  for (int q = 0; q < 3; ++q) {
    nb[q] = results[q].nbar.value;
    lo[q] = results[q].nbar_interval[0];
    hi[q] = results[q].nbar_interval[1];
  }
  rep.p3d = ground_population_3d(nb);
  rep.p3d_low = ground_population_3d(hi);
  rep.p3d_high = ground_population_3d(lo);
  return rep;
}

} // namespace rsc
