#include <algorithm>
#include <array>
#include <fstream>
#include <map>
#include <sstream>

#include "geneft/common.hpp"
#include "geneft/harness.hpp"
#include "svg.hpp"

namespace fs = std::filesystem;

namespace geneft {
namespace {

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t col(const std::string& name) const {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw std::runtime_error("missing column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
  }
  double num(std::size_t row, const std::string& name) const { return std::stod(rows[row][col(name)]); }
  const std::string& str(std::size_t row, const std::string& name) const { return rows[row][col(name)]; }
};

Table read_table(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  Table t;
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path.string() + " is empty");
  t.header = split_trimmed(line, ',');
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    auto row = split_trimmed(line, ',');
    row.resize(t.header.size());
    t.rows.push_back(std::move(row));
  }
  return t;
}

struct FigureSpec {
  const char* id;
  ExperimentKind source;
};

constexpr std::array<FigureSpec, 7> kFigures{{
    {"critical-fraction-theory", ExperimentKind::StaticsCurve},
    {"critical-fraction-exp", ExperimentKind::FractionSweep},
    {"fig-repon-ps", ExperimentKind::ReponPhaseSpace},
    {"repon-pd", ExperimentKind::LrPhaseDiagram},
    {"repon-prob", ExperimentKind::ReponProbability},
    {"repon-pd-wd", ExperimentKind::WdPhaseDiagram},
    {"goldilocks", ExperimentKind::Goldilocks},
}};

const std::vector<svg::Category>& phase_categories() {
  static const std::vector<svg::Category> c{{"Generalization", "#2ca02c"},
                                            {"Grokking", "#f0c419"},
                                            {"Memorization", "#8e44ad"},
                                            {"Confusion", "#bbbbbb"}};
  return c;
}

int phase_index(const std::string& name) {
  const auto& c = phase_categories();
  for (std::size_t k = 0; k < c.size(); ++k)
    if (c[k].name == name) return static_cast<int>(k);
  throw std::runtime_error("unknown phase label '" + name + "'");
}

class Emitter {
 public:
  Emitter(fs::path run_dir, fs::path out_dir, const RunManifest& manifest)
      : run_dir_(std::move(run_dir)), out_dir_(std::move(out_dir)), manifest_(manifest) {
    fs::create_directories(out_dir_);
  }

  // Outputs whose file name starts with `prefix`, in manifest order.
  std::vector<ManifestEntry> inputs(const std::string& prefix) const {
    std::vector<ManifestEntry> out;
    for (const auto& e : manifest_.outputs)
      if (e.path.rfind(prefix, 0) == 0) out.push_back(e);
    if (out.empty()) throw std::runtime_error("manifest lists no '" + prefix + "*' outputs");
    return out;
  }

  bool has(const std::string& name) const {
    return std::any_of(manifest_.outputs.begin(), manifest_.outputs.end(),
                       [&](const ManifestEntry& e) { return e.path == name; });
  }

  Table load(const std::string& name) const { return read_table(run_dir_ / name); }

  void save(const std::string& name, const std::string& text) {
    const fs::path path = out_dir_ / name;
    std::ofstream out(path, std::ios::binary);
    out << text;
    if (!out) throw std::runtime_error("cannot write " + path.string());
    written_.push_back(path);
  }

  std::vector<fs::path> written() const { return written_; }

 private:
  fs::path run_dir_;
  fs::path out_dir_;
  const RunManifest& manifest_;
  std::vector<fs::path> written_;
};

std::string suffix(const ManifestEntry& e) { return e.relation.empty() ? "" : "_" + e.relation; }

void critical_fraction_theory(Emitter& em) {
  for (const auto& entry : em.inputs("statics_")) {
    const Table mc = em.load(entry.path);
    std::ostringstream csv_text;
    CsvWriter csv(csv_text);
    csv.header({"relation", "series", "fraction", "accuracy", "stderr"});
    svg::Series mc_line{"Monte Carlo", {}, {}, false};
    for (std::size_t r = 0; r < mc.rows.size(); ++r) {
      csv.field(entry.relation).field("mc").field(mc.num(r, "fraction")).field(mc.num(r, "accuracy"));
      csv.field(mc.num(r, "stderr"));
      csv.end_row();
      mc_line.x.push_back(mc.num(r, "fraction"));
      mc_line.y.push_back(mc.num(r, "accuracy"));
    }
    std::vector<svg::Series> lines{mc_line};
    const std::string analytic_name = "analytic_" + entry.relation + ".csv";
    if (em.has(analytic_name)) {
      const Table an = em.load(analytic_name);
      svg::Series ub{"analytic", {}, {}, true};
      for (std::size_t r = 0; r < an.rows.size(); ++r) {
        csv.field(entry.relation).field("analytic").field(an.num(r, "fraction")).field(an.num(r, "f_ub")).field("");
        csv.end_row();
        ub.x.push_back(an.num(r, "fraction"));
        ub.y.push_back(an.num(r, "f_ub"));
      }
      lines.push_back(ub);
    }
    const std::string base = "critical-fraction-theory" + suffix(entry);
    em.save(base + ".csv", csv_text.str());
    em.save(base + ".svg",
            svg::line_chart({"best attainable accuracy: " + entry.relation, "training fraction", "accuracy"}, lines));
  }
}

void critical_fraction_exp(Emitter& em) {
  for (const auto& entry : em.inputs("fraction_")) {
    const Table t = em.load(entry.path);
    std::ostringstream csv_text;
    CsvWriter csv(csv_text);
    csv.header({"relation", "mode", "depth", "width", "fraction", "mean_accuracy", "spread"});
    svg::Series line{"", {}, {}, false};
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
      csv.field(entry.relation).field(t.str(r, "mode")).field(t.str(r, "depth")).field(t.str(r, "width"));
      csv.field(t.num(r, "fraction")).field(t.num(r, "mean_accuracy")).field(t.num(r, "spread"));
      csv.end_row();
      line.label = t.str(r, "mode") + " depth " + t.str(r, "depth");
      line.x.push_back(t.num(r, "fraction"));
      line.y.push_back(t.num(r, "mean_accuracy"));
    }
    const std::string base = "critical-fraction-exp" + suffix(entry);
    em.save(base + ".csv", csv_text.str());
    em.save(base + ".svg",
            svg::line_chart({"learned accuracy: " + entry.relation, "training fraction", "accuracy"}, {line}));
  }
}

// Distinct sorted values of a column, formatted for tick labels.
std::vector<double> distinct(const Table& t, const std::string& name) {
  std::vector<double> v;
  for (std::size_t r = 0; r < t.rows.size(); ++r) v.push_back(t.num(r, name));
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

std::size_t position(const std::vector<double>& values, double v) {
  return static_cast<std::size_t>(std::lower_bound(values.begin(), values.end(), v) - values.begin());
}

std::vector<std::string> labels(const std::vector<double>& values, std::size_t every = 1) {
  std::vector<std::string> out;
  for (std::size_t k = 0; k < values.size(); ++k) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", values[k]);
    out.push_back(k % every == 0 || k + 1 == values.size() ? buf : "");
  }
  return out;
}

void repon_phase_space(Emitter& em) {
  const Table t = em.load(em.inputs("phase_space")[0].path);
  std::ostringstream csv_text;
  CsvWriter csv(csv_text);
  csv.header({"a2_0", "c_0", "C", "collision"});
  const auto xs = distinct(t, "a2_0"), ys = distinct(t, "c_0");
  std::vector<std::vector<int>> grid(ys.size(), std::vector<int>(xs.size(), -1));
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const std::string& label = t.str(r, "label");
    const std::string flag = label == "Collision" ? "1" : label == "NoCollision" ? "0" : "";
    csv.field(t.num(r, "a2_0")).field(t.num(r, "c_0")).field(t.num(r, "C")).field(flag);
    csv.end_row();
    grid[position(ys, t.num(r, "c_0"))][position(xs, t.num(r, "a2_0"))] = flag == "1" ? 0 : flag == "0" ? 1 : 2;
  }
  em.save("fig-repon-ps.csv", csv_text.str());
  const std::size_t every = std::max<std::size_t>(1, xs.size() / 6);
  em.save("fig-repon-ps.svg", svg::heatmap({"repon phase space", "a2(0)", "c(0)"}, labels(xs, every), labels(ys, every),
                                           grid, {{"collision", "#2ca02c"}, {"no collision", "#d62728"},
                                                  {"boundary", "#333333"}}));
}

// Collapses repeats to the most frequent phase (ties go to the earlier label
// in Generalization, Grokking, Memorization, Confusion order).
void phase_grid(Emitter& em, const std::string& prefix, const std::string& id, const std::string& x_column,
                const std::string& x_label) {
  for (const auto& entry : em.inputs(prefix)) {
    const Table t = em.load(entry.path);
    const auto xs = distinct(t, x_column), ys = distinct(t, "eta_dec");
    std::vector<std::vector<std::array<int, 4>>> counts(ys.size(), std::vector<std::array<int, 4>>(xs.size()));
    for (auto& row : counts)
      for (auto& c : row) c.fill(0);
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
      ++counts[position(ys, t.num(r, "eta_dec"))][position(xs, t.num(r, x_column))][phase_index(t.str(r, "phase"))];
    }
    std::ostringstream csv_text;
    CsvWriter csv(csv_text);
    csv.header({"relation", x_column, "eta_dec", "phase", "generalizing_fraction", "repeats"});
    std::vector<std::vector<int>> grid(ys.size(), std::vector<int>(xs.size(), -1));
    for (std::size_t y = 0; y < ys.size(); ++y) {
      for (std::size_t x = 0; x < xs.size(); ++x) {
        const auto& c = counts[y][x];
        const int total = c[0] + c[1] + c[2] + c[3];
        if (total == 0) continue;
        const int best = static_cast<int>(std::max_element(c.begin(), c.end()) - c.begin());
        grid[y][x] = best;
        csv.field(entry.relation).field(xs[x]).field(ys[y]).field(phase_categories()[best].name);
        csv.field(static_cast<double>(c[0] + c[1]) / total).field(total);
        csv.end_row();
      }
    }
    const std::string base = id + suffix(entry);
    em.save(base + ".csv", csv_text.str());
    em.save(base + ".svg", svg::heatmap({"phases: " + entry.relation, x_label, "decoder learning rate"}, labels(xs),
                                        labels(ys), grid, phase_categories()));
  }
}

void repon_probability(Emitter& em) {
  const Table t = em.load(em.inputs("probability")[0].path);
  std::ostringstream csv_text;
  CsvWriter csv(csv_text);
  csv.header({"ratio", "sigma_a", "sigma_c", "series", "probability", "stderr"});
  std::map<std::pair<double, double>, std::pair<svg::Series, svg::Series>> by_init;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const double ratio = t.num(r, "ratio"), sa = t.num(r, "sigma_a"), sc = t.num(r, "sigma_c");
    csv.field(ratio).field(sa).field(sc).field("closed_form").field(t.num(r, "p_closed")).field("");
    csv.end_row();
    csv.field(ratio).field(sa).field(sc).field("monte_carlo").field(t.num(r, "p_mc")).field(t.num(r, "stderr"));
    csv.end_row();
    auto& [closed, mc] = by_init[{sa, sc}];
    char label[64];
    std::snprintf(label, sizeof label, "%.3g/%.3g", sa, sc);
    closed.label = std::string("closed ") + label;
    closed.dashed = true;
    mc.label = std::string("MC ") + label;
    closed.x.push_back(ratio);
    closed.y.push_back(t.num(r, "p_closed"));
    mc.x.push_back(ratio);
    mc.y.push_back(t.num(r, "p_mc"));
  }
  std::vector<svg::Series> lines;
  for (auto& [key, pair] : by_init) {
    lines.push_back(pair.first);
    lines.push_back(pair.second);
  }
  em.save("repon-prob.csv", csv_text.str());
  svg::Axes axes{"collision probability", "decoder / encoder learning rate", "probability"};
  axes.log_x = true;
  em.save("repon-prob.svg", svg::line_chart(axes, lines));
}

void goldilocks(Emitter& em) {
  for (const auto& entry : em.inputs("goldilocks_")) {
    const Table t = em.load(entry.path);
    std::ostringstream csv_text;
    CsvWriter csv(csv_text);
    csv.header({"relation", "depth", "mean_test_acc", "mean_train_acc", "repeats"});
    svg::Series test{"test", {}, {}, false}, train{"train", {}, {}, true};
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
      csv.field(entry.relation).field(t.str(r, "depth")).field(t.num(r, "mean_test_acc"));
      csv.field(t.num(r, "mean_train_acc")).field(t.str(r, "repeats"));
      csv.end_row();
      test.x.push_back(t.num(r, "depth"));
      test.y.push_back(t.num(r, "mean_test_acc"));
      train.x.push_back(t.num(r, "depth"));
      train.y.push_back(t.num(r, "mean_train_acc"));
    }
    const std::string base = "goldilocks" + suffix(entry);
    em.save(base + ".csv", csv_text.str());
    em.save(base + ".svg",
            svg::line_chart({"accuracy vs decoder depth: " + entry.relation, "hidden layers", "accuracy"}, {test, train}));
  }
}

}  // namespace

const std::vector<std::string>& figure_ids() {
  static const std::vector<std::string> ids = [] {
    std::vector<std::string> v;
    for (const auto& f : kFigures) v.push_back(f.id);
    return v;
  }();
  return ids;
}

std::vector<fs::path> emit_figure_data(const fs::path& run_dir, const std::string& figure_id, const fs::path& out_dir) {
  const auto spec = std::find_if(kFigures.begin(), kFigures.end(), [&](const FigureSpec& f) { return figure_id == f.id; });
  if (spec == kFigures.end()) {
    std::string known;
    for (const auto& id : figure_ids()) known += (known.empty() ? "" : ", ") + id;
    throw std::invalid_argument("unknown figure id '" + figure_id + "' (expected one of " + known + ")");
  }
  const RunManifest manifest = read_manifest(run_dir / "manifest.json");
  if (manifest.experiment != spec->source) {
    throw std::invalid_argument("figure " + figure_id + " needs a " + to_string(spec->source) + " run, but " +
                                run_dir.string() + " holds " + to_string(manifest.experiment));
  }
  Emitter em(run_dir, out_dir, manifest);
  switch (spec->source) {
    case ExperimentKind::StaticsCurve:
      critical_fraction_theory(em);
      break;
    case ExperimentKind::FractionSweep:
      critical_fraction_exp(em);
      break;
    case ExperimentKind::ReponPhaseSpace:
      repon_phase_space(em);
      break;
    case ExperimentKind::LrPhaseDiagram:
      phase_grid(em, "phase_lr_", "repon-pd", "eta_enc", "encoder learning rate");
      break;
    case ExperimentKind::WdPhaseDiagram:
      phase_grid(em, "phase_wd_", "repon-pd-wd", "wd", "decoder weight decay");
      break;
    case ExperimentKind::ReponProbability:
      repon_probability(em);
      break;
    case ExperimentKind::Goldilocks:
      goldilocks(em);
      break;
    default:
      break;
  }
  return em.written();
}

}  // namespace geneft
