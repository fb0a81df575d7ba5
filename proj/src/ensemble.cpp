#include "stochagg/ensemble.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace stochagg {

SampleStats sample_stats(const std::vector<double>& xs) {
  SampleStats s;
  if (xs.empty()) return s;
  const double x0 = xs.front();
  double sum = 0.0, sq = 0.0;
  s.min = s.max = x0;
  for (double x : xs) {
    const double d = x - x0;
    sum += d;
    sq += d * d;
    s.min = std::min(s.min, x);
    s.max = std::max(s.max, x);
  }
  const double n = static_cast<double>(xs.size());
  s.mean = x0 + sum / n;
  if (xs.size() > 1) s.variance = std::max(0.0, (sq - sum * sum / n) / (n - 1.0));
  return s;
}

Field path_initial_condition(const Field& u0, const ModelSpec& spec, const RunConfig& config, std::size_t path) {
  if (config.perturb_delta == 0.0) return u0;
  RngStream init = derive_stream(config.seed ^ kInitStreamSalt, path);
  return perturb_initial(u0, config.perturb_delta, spec.ubar, config.perturb_margin, init);
}

EnsembleResult run_ensemble(const ModelSpec& spec, const Field& u0, const RunConfig& config,
                            const EnsembleOptions& options, const SinkFactory& sinks) {
  if (options.n_paths < 1) throw std::invalid_argument("ensemble needs at least one path");
  config.check();
  const StabilityCheck sc = check_stability(spec, u0.grid(), config);
  if (sc.status == StabilityCheck::Status::Error) throw StabilityError(sc.message);

  std::vector<PathSummary> paths(options.n_paths);
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;

  auto worker = [&]() {
    for (;;) {
      const std::size_t p = next.fetch_add(1);
      if (p >= options.n_paths) return;
      try {
        std::vector<std::unique_ptr<PathSink>> owned;
        if (sinks) owned = sinks(p);
        std::vector<PathSink*> raw;
        for (auto& s : owned) raw.push_back(s.get());
        RngStream stream = derive_stream(config.seed, p);
        PathResult r = run_path(path_initial_condition(u0, spec, config, p), spec, config, stream, raw);
        PathSummary& out = paths[p];
        out.index = p;
        out.records = r.records;
        out.blowup = r.blowup;
        out.sup_l2_sq = options.sup_every_step ? r.sup_l2_sq_steps : r.sup_l2_sq_records;
        out.grad_A_integral = r.grad_A_time_integral;
        out.bounds = r.bounds;
        if (options.keep_paths) out.full = std::move(r);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next.store(options.n_paths);
        return;
      }
    }
  };

  const unsigned nthreads = std::max(1u, std::min<unsigned>(options.workers, static_cast<unsigned>(options.n_paths)));
  if (nthreads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(nthreads);
    for (unsigned k = 0; k < nthreads; ++k) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);

  EnsembleResult res;
  EnsembleStats& st = res.stats;
  st.q0 = options.q0;
  st.sup_every_step = options.sup_every_step;
  st.path_count = options.n_paths;
  std::vector<const PathSummary*> good;
  for (const auto& p : paths) {
    st.node_steps += p.bounds.node_steps;
    st.bound_violations += p.bounds.violations();
    if (p.blowup)
      ++st.failed_count;
    else
      good.push_back(&p);
  }

  if (!good.empty()) {
    const std::size_t nrec = good.front()->records.size();
    std::vector<double> mass, l2, mn, mx;
    for (std::size_t r = 0; r < nrec; ++r) {
      mass.clear();
      l2.clear();
      mn.clear();
      mx.clear();
      for (const PathSummary* p : good) {
        const DiagnosticsRow& row = p->records[r];
        mass.push_back(row.mass);
        l2.push_back(row.l2_sq);
        mn.push_back(row.min_u);
        mx.push_back(row.max_u);
      }
      st.per_time.push_back({good.front()->records[r].t, sample_stats(mass), sample_stats(l2), sample_stats(mn),
                             sample_stats(mx)});
    }
    std::vector<double> sup, supq, ga, gaq;
    for (const PathSummary* p : good) {
      sup.push_back(p->sup_l2_sq);
      supq.push_back(std::pow(std::sqrt(p->sup_l2_sq), options.q0));
      ga.push_back(p->grad_A_integral);
      gaq.push_back(std::pow(p->grad_A_integral, 0.5 * options.q0));
    }
    st.sup_l2_sq_mean = sample_stats(sup).mean;
    st.sup_l2_q0_moment = sample_stats(supq).mean;
    st.grad_A_integral_mean = sample_stats(ga).mean;
    st.grad_A_q0_moment = sample_stats(gaq).mean;
  }
  res.paths = std::move(paths);
  return res;
}

std::vector<MassCurveRow> mass_curve_compare(const EnsembleStats& a, const EnsembleStats& b) {
  if (a.per_time.size() != b.per_time.size()) throw std::invalid_argument("mass_curve_compare: record times differ");
  std::vector<MassCurveRow> rows;
  for (std::size_t k = 0; k < a.per_time.size(); ++k) {
    const auto &ta = a.per_time[k], &tb = b.per_time[k];
    if (std::abs(ta.t - tb.t) > 1e-9 * std::max(1.0, std::abs(ta.t)))
      throw std::invalid_argument("mass_curve_compare: record times differ");
    rows.push_back({ta.t, ta.mass.mean, std::sqrt(ta.mass.variance), tb.mass.mean, std::sqrt(tb.mass.variance),
                    tb.mass.mean - ta.mass.mean});
  }
  return rows;
}

std::string mass_curve_csv(const std::vector<MassCurveRow>& rows) {
  std::ostringstream os;
  os << "t,mean_a,std_a,mean_b,std_b,diff\n";
  char buf[256];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.t, r.mean_a, r.std_a, r.mean_b, r.std_b,
                  r.diff);
    os << buf;
  }
  return os.str();
}

std::string mass_curves_csv(const std::vector<NamedStats>& series) {
  if (series.empty()) return "t\n";
  const std::size_t n = series.front().stats->per_time.size();
  for (const auto& s : series)
    if (s.stats->per_time.size() != n) throw std::invalid_argument("mass_curves_csv: record times differ");
  std::ostringstream os;
  os << "t";
  for (const auto& s : series) os << "," << s.name << "_mean," << s.name << "_std";
  os << "\n";
  char buf[64];
  for (std::size_t k = 0; k < n; ++k) {
    std::snprintf(buf, sizeof buf, "%.17g", series.front().stats->per_time[k].t);
    os << buf;
    for (const auto& s : series) {
      const auto& m = s.stats->per_time[k].mass;
      std::snprintf(buf, sizeof buf, ",%.17g", m.mean);
      os << buf;
      std::snprintf(buf, sizeof buf, ",%.17g", std::sqrt(m.variance));
      os << buf;
    }
    os << "\n";
  }
  return os.str();
}

std::string ensemble_stats_csv(const EnsembleStats& st) {
  std::ostringstream os;
  os << "t";
  for (const char* q : {"mass", "l2_sq", "min_u", "max_u"})
    for (const char* m : {"mean", "var", "min", "max"}) os << "," << q << "_" << m;
  os << "\n";
  char buf[64];
  for (const auto& row : st.per_time) {
    std::snprintf(buf, sizeof buf, "%.17g", row.t);
    os << buf;
    for (const SampleStats* s : {&row.mass, &row.l2_sq, &row.min_u, &row.max_u})
      for (double v : {s->mean, s->variance, s->min, s->max}) {
        std::snprintf(buf, sizeof buf, ",%.17g", v);
        os << buf;
      }
    os << "\n";
  }
  return os.str();
}

}  // namespace stochagg
