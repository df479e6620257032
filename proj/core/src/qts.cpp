#include "microlaser/qts.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <deque>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include "microlaser/error.hpp"
#include "microlaser/qmt.hpp"

namespace microlaser {
namespace {

using cplx = std::complex<double>;
constexpr double top_level_limit = 1e-8;
constexpr double min_span_gamma = 50.0;
constexpr std::size_t min_blocks = 16;

//---------------------------------------------------------------------------//
// Effective Hamiltonian, block-diagonal in the excitation number
//---------------------------------------------------------------------------//

struct Block
{
    std::vector<std::size_t> index;  // global state indices
    std::vector<cplx> v;             // eigenvectors, row-major d x d
    std::vector<cplx> vinv;          // inverse of v, row-major
    std::vector<cplx> lambda;        // eigenvalues of H_eff
};

// Hilbert space of the cavity (0..n_max photons) and `atoms` two-level
// atoms. State (n, mask) lives at n * 2^atoms + mask; bit j set = atom j
// excited.
struct Space
{
    std::size_t atoms = 0;
    std::size_t dim = 0;
    std::vector<Block> blocks;
    std::vector<double> decay;  // diagonal of the decay operator per state
};

Space build_space(std::size_t atoms,
                  std::size_t n_max,
                  double g,
                  double gamma_c,
                  double gamma_a)
{
    std::size_t const masks = std::size_t{1} << atoms;
    Space s;
    s.atoms = atoms;
    s.dim = (n_max + 1) * masks;
    s.decay.resize(s.dim);

    std::vector<std::vector<std::size_t>> by_excitation(n_max + atoms + 1);
    for (std::size_t n = 0; n <= n_max; ++n)
    {
        for (std::size_t b = 0; b < masks; ++b)
        {
            auto const up = static_cast<std::size_t>(std::popcount(b));
            std::size_t const idx = n * masks + b;
            s.decay[idx] = gamma_c * static_cast<double>(n)
                           + gamma_a * static_cast<double>(up);
            by_excitation[n + up].push_back(idx);
        }
    }

    std::vector<std::size_t> local(s.dim);
    for (auto& members : by_excitation)
    {
        std::size_t const d = members.size();
        if (d == 0)
        {
            continue;
        }
        for (std::size_t i = 0; i < d; ++i)
        {
            local[members[i]] = i;
        }
        Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(d, d);
        for (std::size_t i = 0; i < d; ++i)
        {
            std::size_t const idx = members[i];
            std::size_t const n = idx / masks;
            std::size_t const b = idx % masks;
            h(i, i) = cplx(0, -0.5 * s.decay[idx]);
            if (n == 0)
            {
                continue;
            }
            // a sigma_j^+ : (n, b) -> (n-1, b | j)
            for (std::size_t j = 0; j < atoms; ++j)
            {
                if (b & (std::size_t{1} << j))
                {
                    continue;
                }
                std::size_t const target = (n - 1) * masks + (b | (std::size_t{1} << j));
                double const amp = g * std::sqrt(static_cast<double>(n));
                h(local[target], i) += amp;
                h(i, local[target]) += amp;
            }
        }

        Block blk;
        blk.index = members;
        blk.v.resize(d * d);
        blk.vinv.resize(d * d);
        blk.lambda.resize(d);
        if (d == 1)
        {
            blk.v[0] = 1;
            blk.vinv[0] = 1;
            blk.lambda[0] = h(0, 0);
        }
        else
        {
            Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(h);
            if (es.info() != Eigen::Success)
            {
                throw Error("numerical", "eigendecomposition of H_eff failed");
            }
            Eigen::MatrixXcd const v = es.eigenvectors();
            Eigen::MatrixXcd const vinv = v.inverse();
            Eigen::MatrixXcd const rebuilt
                = v * es.eigenvalues().asDiagonal() * vinv;
            double const scale = std::max(1.0, h.norm());
            if ((rebuilt - h).norm() > 1e-9 * scale)
            {
                throw Error("numerical",
                            "H_eff block is too close to defective for "
                            "eigen-propagation");
            }
            for (std::size_t r = 0; r < d; ++r)
            {
                blk.lambda[r] = es.eigenvalues()(r);
                for (std::size_t c = 0; c < d; ++c)
                {
                    blk.v[r * d + c] = v(r, c);
                    blk.vinv[r * d + c] = vinv(r, c);
                }
            }
        }
        s.blocks.push_back(std::move(blk));
    }
    return s;
}

class PropagatorSet
{
  public:
    PropagatorSet(const TrajectoryConfig& cfg)
        : n_max_(cfg.effective_n_max())
    {
        double const gamma_a = cfg.include_atomic_decay ? cfg.params.gamma_a : 0.0;
        for (std::size_t k = 0; k <= cfg.max_simultaneous_atoms; ++k)
        {
            spaces_.push_back(
                build_space(k, n_max_, cfg.params.g, cfg.params.gamma_c, gamma_a));
        }
    }

    const Space& space(std::size_t atoms) const { return spaces_[atoms]; }
    std::size_t n_max() const { return n_max_; }

  private:
    std::size_t n_max_;
    std::vector<Space> spaces_;
};

//---------------------------------------------------------------------------//
// Single trajectory
//---------------------------------------------------------------------------//

struct Atom
{
    double departure;
};

class Trajectory
{
  public:
    Trajectory(const TrajectoryConfig& cfg, const PropagatorSet& props, std::uint64_t seed)
        : cfg_(cfg), props_(props), rng_(seed), n_max_(props.n_max())
    {
        record_.seed = seed;
        record_.config_hash = cfg.hash();
        record_.gamma_c = cfg.params.gamma_c;
        record_.duration = cfg.duration;
        record_.burn_in = cfg.burn_in;
        record_.photon_distribution.assign(n_max_ + 1, 0.0);
        psi_.assign(n_max_ + 1, cplx(0));
        psi_[cfg.initial_photons] = 1.0;
        dt_sample_ = cfg.effective_sample_interval();
        double const expected_samples = std::floor(cfg.duration / dt_sample_) + 1;
        record_.times.reserve(static_cast<std::size_t>(expected_samples));
        record_.n_mean.reserve(static_cast<std::size_t>(expected_samples));
        record_.n2_mean.reserve(static_cast<std::size_t>(expected_samples));
    }

    TrajectoryRecord run();

  private:
    enum class Event
    {
        sample,
        departure,
        arrival,
        end
    };

    const Space& space() const { return props_.space(atoms_.size()); }
    std::size_t masks() const { return std::size_t{1} << atoms_.size(); }

    void load_coefficients();
    double evaluate(double s, std::vector<cplx>& out, double* decay_expect) const;
    double find_jump_time(double span, double norm_end);
    void apply_jump(double t);
    void normalize();
    void check_truncation(double t) const;
    void record_sample(double t);
    void admit(double t, double t_int);
    void depart(std::size_t slot);

    const TrajectoryConfig& cfg_;
    const PropagatorSet& props_;
    Rng rng_;
    std::size_t n_max_;
    double dt_sample_;
    std::vector<cplx> psi_;
    std::vector<cplx> coeff_;
    mutable std::vector<cplx> scratch_;
    std::vector<Atom> atoms_;
    std::deque<double> queue_;
    double threshold_ = 0;
    TrajectoryRecord record_;
    std::size_t distribution_samples_ = 0;
};

void Trajectory::load_coefficients()
{
    auto const& sp = space();
    coeff_.resize(sp.dim);
    std::size_t offset = 0;
    for (auto const& blk : sp.blocks)
    {
        std::size_t const d = blk.index.size();
        for (std::size_t r = 0; r < d; ++r)
        {
            cplx acc = 0;
            for (std::size_t c = 0; c < d; ++c)
            {
                acc += blk.vinv[r * d + c] * psi_[blk.index[c]];
            }
            coeff_[offset + r] = acc;
        }
        offset += d;
    }
}

// psi(s) = V exp(-i Lambda s) V^{-1} psi(0); returns |psi(s)|^2.
double Trajectory::evaluate(double s, std::vector<cplx>& out, double* decay_expect) const
{
    auto const& sp = space();
    out.resize(sp.dim);
    double norm2 = 0;
    double decay = 0;
    std::size_t offset = 0;
    cplx phase[64];
    for (auto const& blk : sp.blocks)
    {
        std::size_t const d = blk.index.size();
        for (std::size_t c = 0; c < d; ++c)
        {
            phase[c] = std::exp(cplx(0, -1) * blk.lambda[c] * s) * coeff_[offset + c];
        }
        for (std::size_t r = 0; r < d; ++r)
        {
            cplx acc = 0;
            for (std::size_t c = 0; c < d; ++c)
            {
                acc += blk.v[r * d + c] * phase[c];
            }
            std::size_t const idx = blk.index[r];
            out[idx] = acc;
            double const p = std::norm(acc);
            norm2 += p;
            decay += p * sp.decay[idx];
        }
        offset += d;
    }
    if (decay_expect)
    {
        *decay_expect = decay;
    }
    return norm2;
}

// Solve |psi(s)|^2 = threshold on (0, span]; the squared norm decreases
// monotonically with derivative -<psi|Gamma|psi>.
double Trajectory::find_jump_time(double span, double norm_end)
{
    double lo = 0;
    double hi = span;
    double f_lo = 1.0 - threshold_;
    double f_hi = norm_end - threshold_;
    double s = span * f_lo / (f_lo - f_hi);
    for (int iter = 0; iter < 100; ++iter)
    {
        double decay = 0;
        double const f = evaluate(s, scratch_, &decay) - threshold_;
        if (std::abs(f) <= 1e-14 * threshold_ || hi - lo <= 1e-15 * span)
        {
            break;
        }
        if (f > 0)
        {
            lo = s;
            f_lo = f;
        }
        else
        {
            hi = s;
            f_hi = f;
        }
        double next = decay > 0 ? s + f / decay : 0.5 * (lo + hi);
        if (!(next > lo && next < hi))
        {
            next = 0.5 * (lo + hi);
        }
        s = next;
    }
    evaluate(s, psi_, nullptr);
    return s;
}

void Trajectory::apply_jump(double t)
{
    std::size_t const m = masks();
    double const gamma_c = cfg_.params.gamma_c;
    double const gamma_a = cfg_.include_atomic_decay ? cfg_.params.gamma_a : 0.0;

    double cavity_rate = 0;
    std::vector<double> atom_rate(atoms_.size(), 0.0);
    for (std::size_t idx = 0; idx < psi_.size(); ++idx)
    {
        double const p = std::norm(psi_[idx]);
        std::size_t const n = idx / m;
        std::size_t const b = idx % m;
        cavity_rate += gamma_c * static_cast<double>(n) * p;
        for (std::size_t j = 0; j < atoms_.size(); ++j)
        {
            if (b & (std::size_t{1} << j))
            {
                atom_rate[j] += gamma_a * p;
            }
        }
    }
    double total = cavity_rate;
    for (double a : atom_rate)
    {
        total += a;
    }
    double pick = rng_.uniform() * total;

    std::vector<cplx> next(psi_.size(), cplx(0));
    if (pick < cavity_rate || atom_rate.empty())
    {
        for (std::size_t n = 1; n <= n_max_; ++n)
        {
            double const amp = std::sqrt(static_cast<double>(n));
            for (std::size_t b = 0; b < m; ++b)
            {
                next[(n - 1) * m + b] = amp * psi_[n * m + b];
            }
        }
        if (cfg_.record_emissions)
        {
            record_.emission_timestamps.push_back(t);
        }
    }
    else
    {
        pick -= cavity_rate;
        std::size_t j = 0;
        while (j + 1 < atom_rate.size() && pick >= atom_rate[j])
        {
            pick -= atom_rate[j];
            ++j;
        }
        std::size_t const bit = std::size_t{1} << j;
        for (std::size_t idx = 0; idx < psi_.size(); ++idx)
        {
            if ((idx % m) & bit)
            {
                next[idx - bit] = psi_[idx];
            }
        }
        ++record_.atomic_decays;
    }
    psi_ = std::move(next);
    normalize();
    threshold_ = rng_.uniform();
}

void Trajectory::normalize()
{
    double norm2 = 0;
    for (auto const& c : psi_)
    {
        norm2 += std::norm(c);
    }
    if (!(norm2 > 0))
    {
        throw Error("numerical", "trajectory state collapsed to zero norm");
    }
    double const inv = 1.0 / std::sqrt(norm2);
    for (auto& c : psi_)
    {
        c *= inv;
    }
    threshold_ /= norm2;
    double check = 0;
    for (auto const& c : psi_)
    {
        check += std::norm(c);
    }
    record_.max_norm_error = std::max(record_.max_norm_error, std::abs(check - 1.0));
}

void Trajectory::check_truncation(double t) const
{
    std::size_t const m = masks();
    double top = 0;
    double total = 0;
    for (std::size_t idx = 0; idx < psi_.size(); ++idx)
    {
        double const p = std::norm(psi_[idx]);
        total += p;
        if (idx / m == n_max_)
        {
            top += p;
        }
    }
    if (total > 0 && top / total > top_level_limit)
    {
        std::ostringstream msg;
        msg << "Fock truncation n_max = " << n_max_ << " breached at t = " << t
            << " s: top-level population " << top / total;
        throw TruncationError(msg.str());
    }
}

void Trajectory::record_sample(double t)
{
    std::size_t const m = masks();
    double n1 = 0;
    double n2 = 0;
    bool const keep = t >= cfg_.burn_in;
    for (std::size_t n = 0; n <= n_max_; ++n)
    {
        double pn = 0;
        for (std::size_t b = 0; b < m; ++b)
        {
            pn += std::norm(psi_[n * m + b]);
        }
        double const nn = static_cast<double>(n);
        n1 += nn * pn;
        n2 += nn * nn * pn;
        if (keep)
        {
            record_.photon_distribution[n] += pn;
        }
    }
    if (keep)
    {
        ++distribution_samples_;
    }
    record_.times.push_back(t);
    record_.n_mean.push_back(n1);
    record_.n2_mean.push_back(n2);
}

void Trajectory::admit(double t, double t_int)
{
    std::size_t const m = masks();
    std::size_t const new_bit = m;  // next atom occupies bit atoms_.size()
    std::vector<cplx> next((n_max_ + 1) * m * 2, cplx(0));
    for (std::size_t n = 0; n <= n_max_; ++n)
    {
        for (std::size_t b = 0; b < m; ++b)
        {
            next[n * 2 * m + (b | new_bit)] = psi_[n * m + b];
        }
    }
    psi_ = std::move(next);
    atoms_.push_back({t + t_int});
    ++record_.atoms_injected;
}

void Trajectory::depart(std::size_t slot)
{
    std::size_t const m = masks();
    std::size_t const bit = std::size_t{1} << slot;
    double excited = 0;
    for (std::size_t idx = 0; idx < psi_.size(); ++idx)
    {
        if ((idx % m) & bit)
        {
            excited += std::norm(psi_[idx]);
        }
    }
    bool const outcome = rng_.uniform() < excited;

    std::size_t const low_mask = bit - 1;
    std::vector<cplx> next((n_max_ + 1) * (m / 2), cplx(0));
    for (std::size_t n = 0; n <= n_max_; ++n)
    {
        for (std::size_t b = 0; b < m; ++b)
        {
            if (static_cast<bool>(b & bit) != outcome)
            {
                continue;
            }
            std::size_t const compressed = (b & low_mask) | ((b >> 1) & ~low_mask);
            next[n * (m / 2) + compressed] = psi_[n * m + b];
        }
    }
    psi_ = std::move(next);
    atoms_.erase(atoms_.begin() + static_cast<std::ptrdiff_t>(slot));
    // the measurement renormalises the state; the jump threshold is unchanged
    double const keep_threshold = threshold_;
    normalize();
    threshold_ = keep_threshold;
}

TrajectoryRecord Trajectory::run()
{
    double const inf = std::numeric_limits<double>::infinity();
    double const r = cfg_.params.r;
    threshold_ = rng_.uniform();
    double next_arrival = r > 0 ? rng_.exponential(r) : inf;
    std::size_t sample_index = 0;
    double t = 0;

    while (true)
    {
        double const next_sample = static_cast<double>(sample_index) * dt_sample_;
        double next_departure = inf;
        std::size_t departing = 0;
        for (std::size_t j = 0; j < atoms_.size(); ++j)
        {
            if (atoms_[j].departure < next_departure)
            {
                next_departure = atoms_[j].departure;
                departing = j;
            }
        }

        Event ev = Event::end;
        double t_event = cfg_.duration;
        if (next_sample <= t_event)
        {
            ev = Event::sample;
            t_event = next_sample;
        }
        if (next_departure < t_event)
        {
            ev = Event::departure;
            t_event = next_departure;
        }
        if (next_arrival < t_event)
        {
            ev = Event::arrival;
            t_event = next_arrival;
        }

        double const span = t_event - t;
        if (span > 0)
        {
            load_coefficients();
            double const norm_end = evaluate(span, scratch_, nullptr);
            if (norm_end <= threshold_)
            {
                double const s = find_jump_time(span, norm_end);
                t += s;
                apply_jump(t);
                check_truncation(t);
                continue;
            }
            psi_.swap(scratch_);
            t = t_event;
            normalize();
            check_truncation(t);
        }

        switch (ev)
        {
            case Event::sample:
                record_sample(t);
                ++sample_index;
                if (t >= cfg_.duration)
                {
                    ev = Event::end;
                }
                break;
            case Event::departure:
                depart(departing);
                if (!queue_.empty())
                {
                    double const t_int = queue_.front();
                    queue_.pop_front();
                    admit(t, t_int);
                }
                break;
            case Event::arrival:
            {
                double const v = sample_velocity(cfg_.dist, rng_);
                double const t_int = cfg_.params.interaction_time(v);
                if (atoms_.size() < cfg_.max_simultaneous_atoms)
                {
                    admit(t, t_int);
                }
                else
                {
                    queue_.push_back(t_int);
                    ++record_.atoms_queued;
                }
                next_arrival = t + rng_.exponential(r);
                break;
            }
            case Event::end:
                break;
        }
        if (ev == Event::end)
        {
            break;
        }
    }

    if (distribution_samples_ > 0)
    {
        for (double& p : record_.photon_distribution)
        {
            p /= static_cast<double>(distribution_samples_);
        }
    }
    return std::move(record_);
}

}  // namespace

//---------------------------------------------------------------------------//

void TrajectoryConfig::validate() const
{
    params.validate();
    if (!(duration > burn_in) || !(burn_in >= 0))
    {
        throw InvalidArgument("trajectory needs duration > burn_in >= 0");
    }
    if (max_simultaneous_atoms < 1 || max_simultaneous_atoms > 6)
    {
        throw InvalidArgument("max_simultaneous_atoms must be in [1, 6]");
    }
    if (!(sample_interval >= 0))
    {
        throw InvalidArgument("sample_interval must be >= 0");
    }
    std::size_t const cutoff = effective_n_max();
    if (initial_photons >= cutoff)
    {
        throw InvalidArgument("initial photon number exceeds the Fock cutoff");
    }
    if (n_max != 0)
    {
        double const expected
            = params.r > 0 ? steady_state_distribution(params, dist).n_mean : 0.0;
        if (static_cast<double>(n_max) < 4 * expected)
        {
            throw InvalidArgument("n_max must be at least 4x the expected mean photon number");
        }
    }
}

std::size_t TrajectoryConfig::effective_n_max() const
{
    if (n_max != 0)
    {
        return n_max;
    }
    double expected = 0;
    if (params.r > 0 && params.g > 0)
    {
        expected = steady_state_distribution(params, dist).n_mean;
    }
    auto const by_theory = default_truncation(params);
    auto const by_mean = static_cast<std::size_t>(std::ceil(4 * expected));
    return std::max({by_theory, by_mean, initial_photons + 30});
}

double TrajectoryConfig::effective_sample_interval() const
{
    return sample_interval > 0 ? sample_interval : 0.1 / params.gamma_c;
}

std::uint64_t TrajectoryConfig::hash() const
{
    std::ostringstream os;
    os.precision(17);
    os << params.g << ' ' << params.gamma_c << ' ' << params.gamma_a << ' '
       << params.w0 << ' ' << params.v0 << ' ' << params.dv_over_v0 << ' '
       << params.r << ' ' << static_cast<int>(dist.shape()) << ' ' << dist.v0()
       << ' ' << dist.fwhm() << ' ' << dist.lower() << ' ' << dist.upper()
       << ' ' << dist.node_count() << ' ' << n_max << ' '
       << max_simultaneous_atoms << ' ' << duration << ' ' << burn_in << ' '
       << sample_interval << ' ' << include_atomic_decay << ' '
       << initial_photons << ' ' << record_emissions;
    auto const s = os.str();
    return fnv1a64(s);
}

TrajectoryConfig make_trajectory_config(double n_ex,
                                        double theta,
                                        double gamma_c_t_int,
                                        double dv_over_v0,
                                        double duration_gamma,
                                        double burn_in_gamma,
                                        std::uint64_t seed)
{
    TrajectoryConfig cfg;
    cfg.params = MicrolaserParams::from_dimensionless(
        n_ex, theta, gamma_c_t_int, dv_over_v0);
    cfg.dist = VelocityDistribution::from_params(cfg.params);
    cfg.duration = duration_gamma / cfg.params.gamma_c;
    cfg.burn_in = burn_in_gamma / cfg.params.gamma_c;
    cfg.seed = seed;
    return cfg;
}

double sample_velocity(const VelocityDistribution& dist, Rng& rng)
{
    if (dist.shape() == VelocityShape::delta)
    {
        return dist.v0();
    }
    double const sigma = dist.fwhm() / (2.0 * std::sqrt(2.0 * std::log(2.0)));
    for (;;)
    {
        double const v = dist.v0() + sigma * rng.normal();
        if (v >= dist.lower() && v <= dist.upper())
        {
            return v;
        }
    }
}

TrajectoryRecord run_trajectory(const TrajectoryConfig& config)
{
    config.validate();
    PropagatorSet const props(config);
    return Trajectory(config, props, config.seed).run();
}

std::vector<TrajectoryRecord> run_ensemble(const TrajectoryConfig& config,
                                           std::size_t trajectories,
                                           std::size_t threads)
{
    config.validate();
    PropagatorSet const props(config);
    std::vector<TrajectoryRecord> out(trajectories);
    threads = std::max<std::size_t>(1, std::min(threads, trajectories));

    std::mutex error_mutex;
    std::exception_ptr first_error;
    auto worker = [&](std::size_t start) {
        for (std::size_t i = start; i < trajectories; i += threads)
        {
            try
            {
                out[i] = Trajectory(config, props, derive_seed(config.seed, i)).run();
            }
            catch (...)
            {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error)
                {
                    first_error = std::current_exception();
                }
                return;
            }
        }
    };
    if (threads == 1)
    {
        worker(0);
    }
    else
    {
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < threads; ++w)
        {
            pool.emplace_back(worker, w);
        }
        for (auto& th : pool)
        {
            th.join();
        }
    }
    if (first_error)
    {
        std::rethrow_exception(first_error);
    }
    return out;
}

//---------------------------------------------------------------------------//

EnsembleStatistics ensemble_statistics(std::span<const TrajectoryRecord> records,
                                       double burn_in)
{
    if (records.empty())
    {
        throw InsufficientData("ensemble_statistics: no records");
    }
    double const gamma_c = records.front().gamma_c;
    std::uint64_t const hash = records.front().config_hash;
    for (auto const& rec : records)
    {
        if (rec.config_hash != hash || rec.gamma_c != gamma_c)
        {
            throw InvalidArgument("ensemble_statistics: records come from different configs");
        }
    }

    struct BlockSums
    {
        double s1 = 0;
        double s2 = 0;
        double count = 0;
        double emissions = 0;
        double span = 0;
    };
    std::vector<BlockSums> blocks;
    std::size_t const per_record
        = std::max<std::size_t>(1, (min_blocks + records.size() - 1) / records.size());

    for (auto const& rec : records)
    {
        auto const first = std::lower_bound(rec.times.begin(), rec.times.end(), burn_in);
        auto const begin = static_cast<std::size_t>(first - rec.times.begin());
        std::size_t const count = rec.times.size() - begin;
        double const span = rec.duration - burn_in;
        if (count < 2 || !(span * gamma_c >= min_span_gamma))
        {
            throw InsufficientData("ensemble_statistics: post-burn-in span shorter than 50 / gamma_c");
        }
        std::size_t const nb = std::min(per_record, count);
        for (std::size_t k = 0; k < nb; ++k)
        {
            std::size_t const lo = begin + k * count / nb;
            std::size_t const hi = begin + (k + 1) * count / nb;
            BlockSums b;
            for (std::size_t i = lo; i < hi; ++i)
            {
                b.s1 += rec.n_mean[i];
                b.s2 += rec.n2_mean[i];
            }
            b.count = static_cast<double>(hi - lo);
            double const t_lo = burn_in + span * static_cast<double>(k) / static_cast<double>(nb);
            double const t_hi = burn_in + span * static_cast<double>(k + 1) / static_cast<double>(nb);
            b.span = t_hi - t_lo;
            auto const e_lo = std::lower_bound(rec.emission_timestamps.begin(),
                                               rec.emission_timestamps.end(), t_lo);
            auto const e_hi = std::lower_bound(rec.emission_timestamps.begin(),
                                               rec.emission_timestamps.end(), t_hi);
            b.emissions = static_cast<double>(e_hi - e_lo);
            blocks.push_back(b);
        }
    }

    BlockSums total;
    for (auto const& b : blocks)
    {
        total.s1 += b.s1;
        total.s2 += b.s2;
        total.count += b.count;
        total.emissions += b.emissions;
        total.span += b.span;
    }

    struct Estimate
    {
        double mean;
        double var;
        double q;
        double rate;
    };
    auto estimate = [](const BlockSums& s) {
        double const m = s.s1 / s.count;
        double const v = s.s2 / s.count - m * m;
        return Estimate{m,
                        v,
                        m > 0 ? v / m - 1.0 : std::numeric_limits<double>::quiet_NaN(),
                        s.emissions / s.span};
    };

    EnsembleStatistics st;
    auto const full = estimate(total);
    st.n_mean = full.mean;
    st.variance = full.var;
    st.mandel_q = full.q;
    st.emission_rate = full.rate;
    st.blocks = blocks.size();
    st.span = total.span;
    if (!(full.mean > 0))
    {
        st.status = "degenerate";
        st.mandel_q = std::numeric_limits<double>::quiet_NaN();
        st.mandel_q_err = std::numeric_limits<double>::quiet_NaN();
        return st;
    }

    // leave-one-block-out jackknife
    std::size_t const nb = blocks.size();
    std::vector<Estimate> loo(nb);
    Estimate avg{0, 0, 0, 0};
    for (std::size_t k = 0; k < nb; ++k)
    {
        BlockSums s = total;
        s.s1 -= blocks[k].s1;
        s.s2 -= blocks[k].s2;
        s.count -= blocks[k].count;
        s.emissions -= blocks[k].emissions;
        s.span -= blocks[k].span;
        loo[k] = estimate(s);
        avg.mean += loo[k].mean / static_cast<double>(nb);
        avg.var += loo[k].var / static_cast<double>(nb);
        avg.q += loo[k].q / static_cast<double>(nb);
        avg.rate += loo[k].rate / static_cast<double>(nb);
    }
    Estimate spread{0, 0, 0, 0};
    for (auto const& e : loo)
    {
        spread.mean += (e.mean - avg.mean) * (e.mean - avg.mean);
        spread.var += (e.var - avg.var) * (e.var - avg.var);
        spread.q += (e.q - avg.q) * (e.q - avg.q);
        spread.rate += (e.rate - avg.rate) * (e.rate - avg.rate);
    }
    double const scale = static_cast<double>(nb - 1) / static_cast<double>(nb);
    st.n_mean_err = std::sqrt(scale * spread.mean);
    st.variance_err = std::sqrt(scale * spread.var);
    st.mandel_q_err = std::sqrt(scale * spread.q);
    st.emission_rate_err = std::sqrt(scale * spread.rate);
    return st;
}

//---------------------------------------------------------------------------//

TrajectoryConfig with_gamma_c_t_int(const TrajectoryConfig& base, double gamma_c_t_int)
{
    auto const& p = base.params;
    TrajectoryConfig cfg = base;
    cfg.params = MicrolaserParams::from_dimensionless(
        p.n_ex(), p.theta(), gamma_c_t_int, p.dv_over_v0, p.gamma_c, p.w0);
    cfg.params.gamma_a = p.gamma_a;
    if (base.dist.shape() == VelocityShape::delta)
    {
        cfg.dist = VelocityDistribution::delta(cfg.params.v0);
    }
    else
    {
        double const s = cfg.params.v0 / base.dist.v0();
        cfg.dist = base.dist.rescaled(s);
    }
    return cfg;
}

AlphaSlope fit_alpha_slope(std::span<const SlopePoint> points)
{
    if (points.size() < 3)
    {
        throw InvalidArgument("alpha slope needs at least 3 gamma_c t_int values");
    }
    std::vector<double> x;
    std::vector<double> y;
    std::vector<double> w;
    for (auto const& p : points)
    {
        x.push_back(p.gamma_c_t_int);
        y.push_back(p.q);
        w.push_back(p.q_err > 0 ? 1.0 / (p.q_err * p.q_err) : 1.0);
    }
    auto const fit = fit_powers(x, y, w, 0, 1);
    AlphaSlope out;
    out.q_intercept = fit.coefficients[0];
    out.alpha = fit.coefficients[1];
    bool const weighted = points.front().q_err > 0;
    double const scale = weighted ? 1.0 : fit.reduced_chi2();
    out.q_intercept_err = std::sqrt(fit.variance(0) * scale);
    out.alpha_err = std::sqrt(fit.variance(1) * scale);
    out.r_squared = fit.r_squared;
    out.reduced_chi2 = fit.reduced_chi2();
    out.points.assign(points.begin(), points.end());
    return out;
}

AlphaSlope alpha_slope_scan(const TrajectoryConfig& base,
                            std::span<const double> gamma_c_t_int_values,
                            const EnsembleOptions& options)
{
    if (gamma_c_t_int_values.size() < 3)
    {
        throw InvalidArgument("alpha slope scan needs at least 3 gamma_c t_int values");
    }
    double const n_ex = base.params.n_ex();
    double const theta = base.params.theta();
    double const dv = base.params.dv_over_v0;
    std::vector<SlopePoint> points;
    for (double tau : gamma_c_t_int_values)
    {
        auto const cfg = with_gamma_c_t_int(base, tau);
        auto close = [](double a, double b) {
            return std::abs(a - b) <= 1e-9 * std::max(1.0, std::abs(a));
        };
        if (!close(cfg.params.n_ex(), n_ex) || !close(cfg.params.theta(), theta)
            || cfg.params.dv_over_v0 != dv)
        {
            throw InvalidArgument("alpha slope scan: parameter sets do not share N_ex, Theta, dv");
        }
        auto const records = run_ensemble(cfg, options.trajectories, options.threads);
        auto const st = ensemble_statistics(records, cfg.burn_in);
        points.push_back({tau, st.mandel_q, st.mandel_q_err, st.n_mean, st.n_mean_err});
    }
    return fit_alpha_slope(points);
}

}  // namespace microlaser
