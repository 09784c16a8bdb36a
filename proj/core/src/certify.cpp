#include "gcmp/certify.hpp"

#include <cmath>
#include <map>
#include <set>
#include <stdexcept>

namespace gcmp {

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Holds: return "holds";
    case Verdict::Fails: return "fails";
    case Verdict::NotApplicable: return "not-applicable";
    case Verdict::PreconditionFailed: return "precondition-failed";
  }
  return "?";
}

Filtration observed_filtration(const JointModel& model) {
  Filtration f;
  f.label = "O_t";
  for (int t = 0; t <= model.process().grid.horizon; ++t)
    f.stages.push_back(observed_partition_upto(model, t));
  return f;
}

Filtration fstar_filtration(const JointModel& model) {
  Filtration f;
  f.label = "F*_t";
  const Partition x = sigma_x(model);
  for (int t = 0; t <= model.process().grid.horizon; ++t)
    f.stages.push_back(join(x, observed_partition_upto(model, t)));
  return f;
}

Filtration x_filtration(const JointModel& model) {
  Filtration f;
  f.label = "X_t";
  for (int t = 0; t <= model.process().grid.horizon; ++t)
    f.stages.push_back(sigma_x_upto(model, t));
  return f;
}

Filtration joint_filtration(const JointModel& model) {
  Filtration f;
  f.label = "F_t";
  for (int t = 0; t <= model.process().grid.horizon; ++t)
    f.stages.push_back(join(sigma_x_upto(model, t), sigma_r_upto(model, t)));
  return f;
}

CountingProcess counting_of_R(const JointModel& model,
                              CountingConvention convention) {
  const int tau = model.process().grid.horizon;
  const unsigned full = model.space().r_mask_count() - 1u;
  CountingProcess n;
  n.convention = convention;
  n.mark_count = static_cast<int>(model.space().r_mask_count());
  n.marks.reserve(model.space().size());
  for (const auto& p : model.space().paths()) {
    std::vector<unsigned> m(tau);
    unsigned prev = convention == CountingConvention::Windows ? full : 0u;
    for (int t = 0; t < tau; ++t) {
      if (convention == CountingConvention::Visits) {
        m[t] = p.r[t];  // the visit mask itself is the mark
      } else {
        m[t] = p.r[t] ^ prev;  // components whose window flipped
        prev = p.r[t];
      }
    }
    n.marks.push_back(std::move(m));
  }
  return n;
}

CountingProcess counting_of_X(const JointModel& model, int component) {
  const auto& states = model.process().states;
  if (component < 0 || component >= states.dim())
    throw std::invalid_argument("bad component");
  if (states.components[component].size() != 2)
    throw std::runtime_error("not applicable");
  const int tau = model.process().grid.horizon;
  CountingProcess n;
  n.convention = CountingConvention::Windows;
  n.mark_count = 2;
  n.marks.reserve(model.space().size());
  for (const auto& p : model.space().paths()) {
    std::vector<unsigned> m(tau);
    int prev = 0;
    for (int t = 0; t < tau; ++t) {
      const int cur = states.component_of(p.x[t], component);
      if (cur < prev) throw std::runtime_error("not applicable");
      m[t] = static_cast<unsigned>(cur - prev);
      prev = cur;
    }
    n.marks.push_back(std::move(m));
  }
  return n;
}

Compensator compensator(const JointModel& model, const CountingProcess& N,
                        const Filtration& filtration, ParamPair params) {
  const int tau = model.process().grid.horizon;
  if (static_cast<int>(filtration.stages.size()) != tau + 1)
    throw std::invalid_argument("filtration stage count mismatch");
  const Measure& mu = model.measure(params);
  Compensator out;
  out.params = params;
  out.filtration_label = filtration.label;
  out.increments.resize(tau);
  for (int t = 1; t <= tau; ++t) {
    const Partition& stage = filtration.stages[t - 1];
    auto& per_mark = out.increments[t - 1];
    per_mark.assign(N.mark_count, PathFunction{&model.space(), std::vector<double>(model.space().size(), 0.0)});
    for (const auto& atom : stage.atoms) {
      CompensatedSum total;
      std::vector<CompensatedSum> hit(N.mark_count);
      for (auto i : atom) {
        total.add(mu.p[i]);
        hit[N.marks[i][t - 1]].add(mu.p[i]);
      }
      if (total.value() <= 0.0) throw std::runtime_error("null atom");
      for (int m = 0; m < N.mark_count; ++m) {
        const double lam = hit[m].value() / total.value();
        for (auto i : atom) per_mark[m].v[i] = lam;
      }
    }
  }
  return out;
}

namespace {

std::vector<ParamPair> all_params(const JointModel& model) {
  std::vector<ParamPair> out;
  for (int ti = 0; ti < model.theta_count(); ++ti)
    for (int pi = 0; pi < model.psi_count(); ++pi) out.push_back({ti, pi});
  return out;
}

Certificate fail_cert(std::string name, Witness w, double tol) {
  Certificate c;
  c.condition = std::move(name);
  c.verdict = Verdict::Fails;
  c.witness = std::move(w);
  c.tolerance = tol;
  return c;
}

Certificate hold_cert(std::string name, double tol) {
  Certificate c;
  c.condition = std::move(name);
  c.verdict = Verdict::Holds;
  c.tolerance = tol;
  return c;
}

// First path pair in one atom of `field` on which f differs beyond tol.
std::optional<std::pair<std::uint32_t, std::uint32_t>> nonconstant_witness(
    const PathFunction& f, const Partition& field, double tol) {
  for (const auto& atom : field.atoms) {
    for (auto i : atom) {
      if (!nearly_equal(f.v[i], f.v[atom.front()], tol))
        return std::make_pair(atom.front(), i);
    }
  }
  return std::nullopt;
}

}  // namespace

Certificate check_car_dyn(const JointModel& model,
                          CountingConvention convention) {
  const double tol = derived_tol();
  const auto N = counting_of_R(model, convention);
  const Filtration obs = observed_filtration(model);
  const Filtration fstar = fstar_filtration(model);
  for (ParamPair params : all_params(model)) {
    const Compensator lo = compensator(model, N, obs, params);
    const Compensator lf = compensator(model, N, fstar, params);
    for (int t = 0; t < model.process().grid.horizon; ++t) {
      for (int m = 0; m < N.mark_count; ++m) {
        for (std::uint32_t i = 0; i < model.space().size(); ++i) {
          if (!nearly_equal(lo.increments[t][m].v[i],
                            lf.increments[t][m].v[i], tol)) {
            Witness w;
            w.num = params;
            w.den = params;
            w.t = t + 1;
            w.atom = obs.stages[t].atom_of[i];
            w.path_a = i;
            w.path_b = i;
            w.detail = "compensator increment differs between O and F* (mark " +
                       std::to_string(m) + ")";
            return fail_cert("CAR(DYN)", std::move(w), tol);
          }
        }
      }
    }
  }
  return hold_cert("CAR(DYN)", tol);
}

Certificate check_car_gcmp(const JointModel& model) {
  const double tol = derived_tol();
  const Partition o = observed_partition(model);
  const Partition r = sigma_r(model);
  const Partition x = sigma_x(model);
  const int t0 = model.reference().theta;
  for (int pn = 0; pn < model.psi_count(); ++pn) {
    for (int pd = 0; pd < model.psi_count(); ++pd) {
      const PathFunction l = conditional_lr(model, r, x, {t0, pn}, {t0, pd});
      if (auto bad = nonconstant_witness(l, o, tol)) {
        Witness w;
        w.num = {t0, pn};
        w.den = {t0, pd};
        w.atom = o.atom_of[bad->first];
        w.path_a = bad->first;
        w.path_b = bad->second;
        w.detail = "L_{R|X} not constant on an O-atom";
        return fail_cert("CAR(GCMP)", std::move(w), tol);
      }
    }
  }
  return hold_cert("CAR(GCMP)", tol);
}

Certificate check_car_rel(const JointModel& model) {
  // Kernel-level route, independent of the measure machinery: the ratio
  // q_psi(r|x)/q_psi0(r|x) must agree across all x compatible with (r, rx).
  const double tol = derived_tol();
  const Partition o = observed_partition(model);
  for (int pn = 0; pn < model.psi_count(); ++pn) {
    for (int pd = 0; pd < model.psi_count(); ++pd) {
      const auto& psi_n = model.mechanism().psi_grid[pn];
      const auto& psi_d = model.mechanism().psi_grid[pd];
      for (std::size_t a = 0; a < o.atoms.size(); ++a) {
        const auto& atom = o.atoms[a];
        double first = 0.0;
        bool have = false;
        for (auto i : atom) {
          const Path& p = model.space().path(i);
          const double qn = model.mechanism_cond_prob(psi_n, p.x, p.r);
          const double qd = model.mechanism_cond_prob(psi_d, p.x, p.r);
          const double ratio = qn / qd;
          if (!have) {
            first = ratio;
            have = true;
          } else if (!nearly_equal(ratio, first, tol)) {
            Witness w;
            w.num = {model.reference().theta, pn};
            w.den = {model.reference().theta, pd};
            w.atom = static_cast<std::uint32_t>(a);
            w.path_a = atom.front();
            w.path_b = i;
            w.detail = "kernel ratio differs across x compatible with (r,rx)";
            return fail_cert("CAR(REL)", std::move(w), tol);
          }
        }
      }
    }
  }
  return hold_cert("CAR(REL)", tol);
}

Certificate check_car_abs(const JointModel& model) {
  // Atom-wise form: q_psi(r|x) itself must be constant across compatible x.
  // Unions of atoms then follow by additivity.
  const double tol = derived_tol();
  const Partition o = observed_partition(model);
  // Distinct support x-paths and one representative index each.
  std::map<std::vector<int>, std::uint32_t> xs;
  for (std::uint32_t i = 0; i < model.space().size(); ++i)
    xs.emplace(model.space().path(i).x, i);

  const int d = model.process().states.dim();
  const int r_dim = model.mechanism().r_dim;
  for (int pi = 0; pi < model.psi_count(); ++pi) {
    const auto& psi = model.mechanism().psi_grid[pi];
    for (std::size_t a = 0; a < o.atoms.size(); ++a) {
      const auto& atom = o.atoms[a];
      const Path& rep = model.space().path(atom.front());
      const auto& r_path = rep.r;
      // All support x-paths compatible with (r, rx), including those whose
      // pairing with this r fell off the support.
      double first = 0.0;
      bool have = false;
      std::uint32_t first_idx = 0;
      for (const auto& [x_path, idx] : xs) {
        bool compatible = true;
        for (std::size_t t = 0; t < r_path.size() && compatible; ++t) {
          const unsigned vis = visible_components(r_path[t], d, r_dim);
          for (int h = 0; h < d && compatible; ++h) {
            if (((vis >> h) & 1u) &&
                model.process().states.component_of(x_path[t], h) !=
                    model.process().states.component_of(rep.x[t], h))
              compatible = false;
          }
        }
        if (!compatible) continue;
        const double q = model.mechanism_cond_prob(psi, x_path, r_path);
        if (!have) {
          first = q;
          have = true;
          first_idx = idx;
        } else if (!nearly_equal(q, first, tol)) {
          Witness w;
          w.num = {model.reference().theta, pi};
          w.den = {model.reference().theta, pi};
          w.atom = static_cast<std::uint32_t>(a);
          w.path_a = first_idx;
          w.path_b = idx;
          w.detail = "P_psi(A ∩ D_x ∩ D_x' | X=x) differs between x and x'";
          return fail_cert("CAR(ABS)", std::move(w), tol);
        }
      }
    }
  }
  return hold_cert("CAR(ABS)", tol);
}

Certificate check_car_loc(const JointModel& model,
                          std::span<const unsigned> r) {
  const double tol = derived_tol();
  const auto event = event_r_equals(model, r);
  if (event.empty()) throw std::runtime_error("r off support");
  const Partition rr = sigma_r(model);
  const Partition x = sigma_x(model);
  const Partition xr = fixed_r_partition(model, r);
  for (ParamPair num : all_params(model)) {
    const PathFunction on_x =
        conditional_lr(model, rr, x, num, model.reference());
    const PathFunction on_xr =
        conditional_lr(model, rr, xr, num, model.reference());
    for (auto i : event) {
      if (!nearly_equal(on_x.v[i], on_xr.v[i], tol)) {
        Witness w;
        w.num = num;
        w.den = model.reference();
        w.path_a = i;
        w.path_b = i;
        w.detail = "L_{R|X} and L_{R|X^r} differ on {R=r}";
        return fail_cert("CAR(GCMP)-loc", std::move(w), tol);
      }
    }
  }
  return hold_cert("CAR(GCMP)-loc", tol);
}

Certificate check_ignorable(const JointModel& model,
                            std::span<const unsigned> r) {
  const double tol = derived_tol();
  const auto event = event_r_equals(model, r);
  if (event.empty()) throw std::runtime_error("r off support");
  const Partition o = observed_partition(model);
  const Partition xr = fixed_r_partition(model, r);
  for (int ti = 0; ti < model.theta_count(); ++ti) {
    for (int p0 = 0; p0 < model.psi_count(); ++p0) {
      const Measure& num = model.measure({ti, p0});
      const Measure& den = model.measure({model.reference().theta, p0});
      const PathFunction l_o = rn_derivative(num, den, o);
      const PathFunction l_xr = rn_derivative(num, den, xr);
      for (auto i : event) {
        if (!nearly_equal(l_o.v[i], l_xr.v[i], tol)) {
          Witness w;
          w.num = {ti, p0};
          w.den = {model.reference().theta, p0};
          w.atom = o.atom_of[i];
          w.path_a = i;
          w.path_b = i;
          w.detail = "observed_lr and ignoring_lr differ on {R=r}";
          return fail_cert("ignorable", std::move(w), tol);
        }
      }
    }
  }
  return hold_cert("ignorable", tol);
}

Certificate check_factorization(const JointModel& model) {
  const double tol = kSumTol;
  const Certificate gcmp = check_car_gcmp(model);
  if (gcmp.verdict != Verdict::Holds) {
    Certificate c;
    c.condition = "factorization";
    c.verdict = Verdict::PreconditionFailed;
    c.tolerance = tol;
    return c;
  }
  const Partition o = observed_partition(model);
  const Partition r = sigma_r(model);
  const Partition x = sigma_x(model);
  const int t0 = model.reference().theta;
  for (int ti = 0; ti < model.theta_count(); ++ti) {
    std::optional<PathFunction> invariant_factor;
    for (int p0 = 0; p0 < model.psi_count(); ++p0) {
      const PathFunction l_x = rn_derivative(
          model.measure({ti, p0}), model.measure({t0, p0}), x);
      const PathFunction e_lx =
          cond_expect(l_x, o, model.measure({t0, p0}));
      // E[L_X | O] must not depend on the psi0 used to compute it.
      if (!invariant_factor) {
        invariant_factor = e_lx;
      } else {
        for (std::uint32_t i = 0; i < model.space().size(); ++i) {
          if (!nearly_equal(e_lx.v[i], invariant_factor->v[i], derived_tol())) {
            Witness w;
            w.num = {ti, p0};
            w.den = {t0, p0};
            w.atom = o.atom_of[i];
            w.path_a = i;
            w.path_b = i;
            w.detail = "E[L_X|O] depends on psi0";
            return fail_cert("factorization", std::move(w), derived_tol());
          }
        }
      }
      for (int pn = 0; pn < model.psi_count(); ++pn) {
        const PathFunction l_o = lr(model, {ti, pn}, {t0, p0}, o);
        const PathFunction l_rx =
            conditional_lr(model, r, x, {t0, pn}, {t0, p0});
        for (std::uint32_t i = 0; i < model.space().size(); ++i) {
          if (!nearly_equal(l_o.v[i], l_rx.v[i] * e_lx.v[i], tol)) {
            Witness w;
            w.num = {ti, pn};
            w.den = {t0, p0};
            w.atom = o.atom_of[i];
            w.path_a = i;
            w.path_b = i;
            w.detail = "L_O != L_{R|X} E[L_X|O]";
            return fail_cert("factorization", std::move(w), tol);
          }
        }
      }
    }
  }
  return hold_cert("factorization", tol);
}

Certificate check_independent_censoring(const JointModel& model,
                                        int component) {
  const double tol = derived_tol();
  Certificate na;
  na.condition = "independent-censoring";
  na.verdict = Verdict::NotApplicable;
  na.tolerance = tol;
  if (model.mechanism().r_dim != 1) return na;
  CountingProcess nx;
  try {
    nx = counting_of_X(model, component);
  } catch (const std::runtime_error&) {
    return na;  // X-component is not a counting process
  }
  const Filtration joint = joint_filtration(model);
  const Filtration self = x_filtration(model);
  for (ParamPair params : all_params(model)) {
    const Compensator lf = compensator(model, nx, joint, params);
    const Compensator lx = compensator(model, nx, self, params);
    for (int t = 0; t < model.process().grid.horizon; ++t) {
      for (int m = 0; m < nx.mark_count; ++m) {
        for (std::uint32_t i = 0; i < model.space().size(); ++i) {
          if (!nearly_equal(lf.increments[t][m].v[i],
                            lx.increments[t][m].v[i], tol)) {
            Witness w;
            w.num = params;
            w.den = params;
            w.t = t + 1;
            w.path_a = i;
            w.path_b = i;
            w.detail = "compensator of X differs between F and X filtrations";
            return fail_cert("independent-censoring", std::move(w), tol);
          }
        }
      }
    }
  }
  return hold_cert("independent-censoring", tol);
}

Certificate check_ignorable_coarse(const JointModel& model,
                                   const VerticalCoarsener& v,
                                   std::span<const unsigned> r) {
  const double tol = derived_tol();
  const auto event = event_r_equals(model, r);
  if (event.empty()) throw std::runtime_error("r off support");
  const Partition o2 = apply_vertical(model, v);
  // X'^r: coarsened values at the coordinates where the fixed r shows them.
  const auto& states = model.process().states;
  const int d = states.dim();
  const int r_dim = model.mechanism().r_dim;
  std::vector<unsigned> rv(r.begin(), r.end());
  const Partition x2r = generate_partition(
      model.space(),
      [&states, &v, d, r_dim, rv](const Path& p) {
        std::vector<int> key;
        for (std::size_t t = 0; t < p.x.size(); ++t) {
          const unsigned vis = visible_components(rv[t], d, r_dim);
          for (int h = 0; h < d; ++h)
            if ((vis >> h) & 1u)
              key.push_back(v.maps[h][states.component_of(p.x[t], h)]);
        }
        return key;
      },
      "X'^r");
  for (int ti = 0; ti < model.theta_count(); ++ti) {
    for (int p0 = 0; p0 < model.psi_count(); ++p0) {
      const Measure& num = model.measure({ti, p0});
      const Measure& den = model.measure({model.reference().theta, p0});
      const PathFunction l_o2 = rn_derivative(num, den, o2);
      const PathFunction l_x2r = rn_derivative(num, den, x2r);
      for (auto i : event) {
        if (!nearly_equal(l_o2.v[i], l_x2r.v[i], tol)) {
          Witness w;
          w.num = {ti, p0};
          w.den = {model.reference().theta, p0};
          w.atom = o2.atom_of[i];
          w.path_a = i;
          w.path_b = i;
          w.detail = "coarsened observed and ignoring ratios differ on {R=r}";
          return fail_cert("ignorable-coarse", std::move(w), tol);
        }
      }
    }
  }
  return hold_cert("ignorable-coarse", tol);
}

bool is_predictable(const JointModel& model, CountingConvention convention) {
  const auto N = counting_of_R(model, convention);
  const Filtration obs = observed_filtration(model);
  for (ParamPair params : all_params(model)) {
    const Compensator lo = compensator(model, N, obs, params);
    for (const auto& per_mark : lo.increments)
      for (const auto& f : per_mark)
        for (double lam : f.v)
          if (!nearly_equal(lam, 0.0, derived_tol()) &&
              !nearly_equal(lam, 1.0, derived_tol()))
            return false;
  }
  return true;
}

Certificate check_stepwise_kernel_mar(const JointModel& model) {
  const double tol = derived_tol();
  const auto& states = model.process().states;
  const int d = states.dim();
  const int r_dim = model.mechanism().r_dim;
  const int tau = model.process().grid.horizon;
  const unsigned masks = model.space().r_mask_count();
  for (int pi = 0; pi < model.psi_count(); ++pi) {
    const auto& psi = model.mechanism().psi_grid[pi];
    for (int t = 1; t <= tau; ++t) {
      // Key: r-history plus the x-coordinates it reveals.
      std::map<std::vector<int>, std::pair<std::uint32_t, std::vector<double>>>
          groups;
      for (std::uint32_t i = 0; i < model.space().size(); ++i) {
        const Path& p = model.space().path(i);
        std::vector<int> key;
        for (int s = 0; s < t - 1; ++s) {
          key.push_back(static_cast<int>(p.r[s]));
          const unsigned vis = visible_components(p.r[s], d, r_dim);
          for (int h = 0; h < d; ++h)
            if ((vis >> h) & 1u)
              key.push_back(states.component_of(p.x[s], h));
        }
        std::vector<double> q(masks);
        const std::span<const unsigned> r_hist(p.r.data(),
                                               static_cast<std::size_t>(t - 1));
        for (unsigned m = 0; m < masks; ++m)
          q[m] = model.mechanism().kernel(psi, t, p.x, r_hist, m);
        auto it = groups.find(key);
        if (it == groups.end()) {
          groups.emplace(std::move(key), std::make_pair(i, std::move(q)));
          continue;
        }
        for (unsigned m = 0; m < masks; ++m) {
          if (!nearly_equal(it->second.second[m], q[m], tol)) {
            Witness w;
            w.num = {model.reference().theta, pi};
            w.den = {model.reference().theta, pi};
            w.t = t;
            w.path_a = it->second.first;
            w.path_b = i;
            w.detail = "r_t kernel differs between x-paths with the same "
                       "observed history";
            return fail_cert("stepwise-MAR", std::move(w), tol);
          }
        }
      }
    }
  }
  return hold_cert("stepwise-MAR", tol);
}

std::vector<std::string> implication_violations(const BatteryResult& out) {
  std::vector<std::string> violations;
  auto holds = [](const Certificate& c) { return c.verdict == Verdict::Holds; };
  if (out.gcmp.verdict != out.rel.verdict)
    violations.push_back("CAR(GCMP) <=> CAR(REL)");
  if (holds(out.dyn) && !holds(out.gcmp))
    violations.push_back("CAR(DYN) => CAR(GCMP)");
  if (holds(out.gcmp) && out.factorization.verdict != Verdict::Holds)
    violations.push_back("CAR(GCMP) => factorization");
  for (std::size_t k = 0; k < out.loc.size(); ++k) {
    const auto& loc = out.loc[k].second;
    const auto& ign = out.ignorable[k].second;
    if (holds(out.dyn) && !holds(loc))
      violations.push_back("CAR(DYN) => CAR(GCMP)-loc");
    if (holds(out.abs) && !holds(loc))
      violations.push_back("CAR(ABS) => CAR(GCMP)-loc");
    if (holds(loc) && !holds(ign))
      violations.push_back("CAR(GCMP)-loc => ignorable");
  }
  return violations;
}

BatteryResult theorem_battery(const JointModel& model) {
  BatteryResult out;
  out.dyn = check_car_dyn(model);
  out.gcmp = check_car_gcmp(model);
  out.rel = check_car_rel(model);
  out.abs = check_car_abs(model);
  out.factorization = check_factorization(model);
  for (const auto& r : support_r_paths(model)) {
    out.loc.emplace_back(r, check_car_loc(model, r));
    out.ignorable.emplace_back(r, check_ignorable(model, r));
  }
  out.violated_arrows = implication_violations(out);
  return out;
}

}  // namespace gcmp
