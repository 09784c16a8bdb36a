#include "gcmp/model_file.hpp"

#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "gcmp/scenarios.hpp"

namespace gcmp {

namespace {

using nlohmann::json;

[[noreturn]] void schema_error(const std::string& msg) {
  throw ParseError("schema error: " + msg, 0, 0);
}

const json& req(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) schema_error(std::string("missing field: ") + key);
  return *it;
}

double decimal(const json& v, const char* what) {
  if (!v.is_string())
    schema_error(std::string(what) + " must be a decimal string");
  const std::string s = v.get<std::string>();
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(s, &used);
  } catch (const std::exception&) {
    schema_error(std::string(what) + ": bad decimal '" + s + "'");
  }
  if (used != s.size())
    schema_error(std::string(what) + ": bad decimal '" + s + "'");
  return out;
}

ParamVec decimal_vec(const json& v, const char* what) {
  if (!v.is_array()) schema_error(std::string(what) + " must be an array");
  ParamVec out;
  for (const auto& e : v) out.push_back(decimal(e, what));
  return out;
}

std::vector<ParamVec> decimal_grid(const json& v, const char* what) {
  if (!v.is_array()) schema_error(std::string(what) + " must be an array");
  std::vector<ParamVec> out;
  for (const auto& e : v) out.push_back(decimal_vec(e, what));
  return out;
}

std::string join_ints(std::span<const int> xs) {
  std::ostringstream os;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) os << ',';
    os << xs[i];
  }
  return os.str();
}

std::string join_masks(std::span<const unsigned> xs) {
  std::ostringstream os;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) os << ',';
    os << xs[i];
  }
  return os.str();
}

using KernelTable = std::map<std::string, std::vector<double>>;

std::vector<KernelTable> parse_tables(const json& v, std::size_t grid_size,
                                      std::size_t row_len, const char* what) {
  if (!v.is_array() || v.size() != grid_size)
    schema_error(std::string(what) + ": need one table per grid point");
  std::vector<KernelTable> tables;
  for (const auto& tj : v) {
    if (!tj.is_object()) schema_error(std::string(what) + ": table expected");
    KernelTable t;
    for (const auto& [key, row] : tj.items()) {
      std::vector<double> probs = decimal_vec(row, what);
      if (probs.size() != row_len)
        schema_error(std::string(what) + ": row '" + key + "' must have " +
                     std::to_string(row_len) + " entries");
      t.emplace(key, std::move(probs));
    }
    tables.push_back(std::move(t));
  }
  return tables;
}

std::size_t grid_index(const std::vector<ParamVec>& grid, const ParamVec& p,
                       const char* what) {
  for (std::size_t i = 0; i < grid.size(); ++i)
    if (grid[i] == p) return i;
  throw std::runtime_error(std::string("off-grid parameters for table ") +
                           what);
}

ProcessKernelFn process_kernel_from(const json& spec,
                                    const std::vector<ParamVec>& theta_grid,
                                    const StateSpace& states) {
  const std::string kind = req(spec, "kind").get<std::string>();
  if (kind == "bernoulli_iid") {
    if (states.dim() != 1 || states.components[0].size() != 2)
      schema_error("bernoulli_iid needs a single binary component");
    return [](const ParamVec& theta, int, std::span<const int>, int x) {
      return x == 1 ? theta[0] : 1.0 - theta[0];
    };
  }
  if (kind == "survival") {
    if (states.dim() != 1 || states.components[0].size() != 2)
      schema_error("survival needs a single binary component");
    return [](const ParamVec& theta, int, std::span<const int> hist, int x) {
      const int prev = hist.empty() ? 0 : hist.back();
      if (prev == 1) return x == 1 ? 1.0 : 0.0;
      return x == 1 ? theta[0] : 1.0 - theta[0];
    };
  }
  if (kind == "table") {
    auto tables = parse_tables(req(spec, "tables"), theta_grid.size(),
                               states.product_size(), "process table");
    return [tables = std::move(tables), theta_grid](
               const ParamVec& theta, int, std::span<const int> hist, int x) {
      const auto& t = tables[grid_index(theta_grid, theta, "process kernel")];
      auto it = t.find(join_ints(hist));
      if (it == t.end())
        throw std::runtime_error("missing process table entry: '" +
                                 join_ints(hist) + "'");
      return it->second[x];
    };
  }
  schema_error("unknown process kind: " + kind);
}

MechanismKernelFn mechanism_kernel_from(const json& spec,
                                        const std::vector<ParamVec>& psi_grid,
                                        unsigned mask_count) {
  const std::string kind = req(spec, "kind").get<std::string>();
  if (kind == "always_on") {
    const unsigned full = mask_count - 1u;
    return [full](const ParamVec&, int, std::span<const int>,
                  std::span<const unsigned>, unsigned r) {
      return r == full ? 1.0 : 0.0;
    };
  }
  if (kind == "table") {
    auto tables = parse_tables(req(spec, "tables"), psi_grid.size(),
                               mask_count, "mechanism table");
    return [tables = std::move(tables), psi_grid](
               const ParamVec& psi, int, std::span<const int> x,
               std::span<const unsigned> r_hist, unsigned r) {
      const auto& t = tables[grid_index(psi_grid, psi, "mechanism kernel")];
      const std::string key = join_ints(x) + "|" + join_masks(r_hist);
      auto it = t.find(key);
      if (it == t.end())
        throw std::runtime_error("missing mechanism table entry: '" + key +
                                 "'");
      return it->second[r];
    };
  }
  schema_error("unknown mechanism kind: " + kind);
}

DependenceClass class_from(const std::string& s) {
  if (s == "past_observed_only") return DependenceClass::PastObservedOnly;
  if (s == "past_x_only") return DependenceClass::PastXOnly;
  if (s == "anticipating") return DependenceClass::Anticipating;
  schema_error("unknown dependence class: " + s);
}

StudySpec parse_study(const json& sj) {
  StudySpec study;
  study.n = req(sj, "n").get<int>();
  study.replicates = req(sj, "replicates").get<int>();
  study.seed = req(sj, "seed").get<std::uint64_t>();
  study.theta_true = decimal_vec(req(sj, "true_theta"), "true_theta");
  study.psi_true = decimal_vec(req(sj, "true_psi"), "true_psi");
  study.theta_template = sj.contains("theta_template")
                             ? decimal_vec(sj["theta_template"],
                                           "theta_template")
                             : study.theta_true;
  if (sj.contains("search")) {
    const json& s = sj["search"];
    if (s.contains("lo")) study.search.lo = decimal(s["lo"], "search.lo");
    if (s.contains("hi")) study.search.hi = decimal(s["hi"], "search.hi");
    if (s.contains("coarse_points"))
      study.search.coarse_points = s["coarse_points"].get<int>();
    if (s.contains("tol")) study.search.tol = decimal(s["tol"], "search.tol");
    if (s.contains("component"))
      study.search.component = s["component"].get<int>();
  }
  if (study.n < 0 || study.replicates < 0)
    schema_error("study sizes must be nonnegative");
  return study;
}

LoadedModel from_json(const json& root, std::size_t path_cap) {
  if (!root.is_object()) schema_error("top level must be an object");

  std::optional<StudySpec> study;
  if (root.contains("study")) study = parse_study(root["study"]);

  if (root.contains("scenario")) {
    const std::string name = req(root, "scenario").get<std::string>();
    const Scenario* sc = nullptr;
    try {
      sc = &find_scenario(name);
    } catch (const std::invalid_argument& e) {
      schema_error(e.what());
    }
    LoadedModel out{sc->build(), name, name, sc->coarsener, std::move(study)};
    return out;
  }

  const json& mj = req(root, "model");
  ProcessModel proc;
  proc.grid.horizon = req(mj, "horizon").get<int>();
  proc.grid.label = mj.value("label", std::string{});
  const json& alph = req(mj, "alphabets");
  if (!alph.is_array() || alph.empty())
    schema_error("alphabets must be a nonempty array");
  for (const auto& a : alph) {
    Alphabet al;
    for (const auto& s : a) al.symbols.push_back(s.get<std::string>());
    if (al.size() < 2) schema_error("alphabet needs at least 2 symbols");
    proc.states.components.push_back(std::move(al));
  }
  proc.theta_grid = decimal_grid(req(mj, "theta_grid"), "theta_grid");
  if (mj.contains("absorbing_state") && !mj["absorbing_state"].is_null())
    proc.absorbing_state = mj["absorbing_state"].get<int>();
  proc.kernel =
      process_kernel_from(req(mj, "process"), proc.theta_grid, proc.states);

  MechanismKernel mech;
  mech.r_dim = mj.value("r_dim", 1);
  if (mech.r_dim != 1 && mech.r_dim != proc.states.dim())
    schema_error("r_dim must be 1 or the number of components");
  mech.psi_grid = decimal_grid(req(mj, "psi_grid"), "psi_grid");
  mech.declared = class_from(mj.value("dependence_class",
                                      std::string("anticipating")));
  mech.kernel = mechanism_kernel_from(req(mj, "mechanism"), mech.psi_grid,
                                      1u << mech.r_dim);

  ParamPair reference;
  const json& ref = req(mj, "reference");
  reference.theta = req(ref, "theta").get<int>();
  reference.psi = req(ref, "psi").get<int>();
  if (reference.theta < 0 ||
      reference.theta >= static_cast<int>(proc.theta_grid.size()) ||
      reference.psi < 0 ||
      reference.psi >= static_cast<int>(mech.psi_grid.size()))
    schema_error("reference indices outside the parameter grids");

  std::optional<VerticalCoarsener> coarsener;
  if (mj.contains("coarsener") && !mj["coarsener"].is_null()) {
    VerticalCoarsener v;
    v.label = mj["coarsener"].value("label", std::string{});
    for (const auto& m : req(mj["coarsener"], "maps"))
      v.maps.push_back(m.get<std::vector<int>>());
    if (static_cast<int>(v.maps.size()) != proc.states.dim())
      schema_error("coarsener needs one map per component");
    coarsener = std::move(v);
  }

  const std::string label = proc.grid.label;
  LoadedModel out{
      build_joint(std::move(proc), std::move(mech), reference, path_cap),
      label, {}, std::move(coarsener), std::move(study)};
  return out;
}

}  // namespace

LoadedModel parse_model_text(const std::string& text, std::size_t path_cap) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    int line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ParseError(e.what(), line, col);
  }
  return from_json(root, path_cap);
}

LoadedModel load_model_file(const std::string& path, std::size_t path_cap) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open file: " + path, 0, 0);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_model_text(buf.str(), path_cap);
}

}  // namespace gcmp
