// Copyright 2026 The qdmesh Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "cli.hpp"

#include <omp.h>

#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <map>
#include <memory>
#include <set>
#include <sstream>

#include "qdm/assembly.hpp"
#include "qdm/error.hpp"
#include "qdm/features.hpp"
#include "qdm/goldberg.hpp"
#include "qdm/kv_config.hpp"
#include "qdm/linkloss.hpp"
#include "qdm/matching.hpp"
#include "qdm/mesh.hpp"
#include "qdm/metrics.hpp"
#include "qdm/tokenizer.hpp"
#include "qdm/tri2quad.hpp"

namespace qdm::cli {
namespace {

// Thrown after CLI11 parsing for argument combinations it cannot express.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

const std::vector<std::string> kVerifyKeys = {"theta_min",        "theta_max",       "dihedral_max",
                                              "tau_quad",         "tau_tri",         "enable_convexity",
                                              "enable_dihedral",  "enable_centroid"};

// Options that double as config keys: a flag given on the command line
// overrides the same key from --config.
class KeyedOptions {
 public:
  KeyedOptions(CLI::App* app, std::set<std::string>* known) : app_(app), known_(known) {}

  void add(const std::string& flag, const std::string& key, const std::string& help) {
    CLI::Option* opt = app_->add_option(flag, values_[key], help);
    opts_.emplace_back(key, opt);
    known_->insert(key);
  }

  void add_verify() {
    for (const std::string& k : kVerifyKeys) add("--" + k, k, "verification: " + k);
  }

  /// Keys reachable only through --config.
  void config_only(const std::vector<std::string>& keys) { known_->insert(keys.begin(), keys.end()); }

  void overlay(KvConfig& kv) const {
    for (const auto& [key, opt] : opts_) {
      if (opt->count() > 0) kv.set(key, values_.at(key));
    }
  }

 private:
  CLI::App* app_;
  std::set<std::string>* known_;
  std::map<std::string, std::string> values_;
  std::vector<std::pair<std::string, CLI::Option*>> opts_;
};

KvConfig pick(const KvConfig& kv, const std::vector<std::string>& keys) {
  KvConfig out;
  for (const auto& [k, v] : kv.entries()) {
    if (std::find(keys.begin(), keys.end(), k) != keys.end()) out.set(k, v);
  }
  return out;
}

struct Context {
  KvConfig kv;
  std::uint64_t seed = 0;
  int verbosity = 0;
  std::ostream* out;
  std::ostream* err;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write " + path);
  f << text;
  if (!f) throw IoError("write failed: " + path);
}

std::string fixed4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

// --- tri2quad --------------------------------------------------------------------

struct Tri2QuadCmd {
  CLI::App* app;
  KeyedOptions keyed;
  std::string input, output, dump;

  Tri2QuadCmd(CLI::App& root, std::set<std::string>& known)
      : app(root.add_subcommand("tri2quad", "merge triangle pairs into quads")), keyed(app, &known) {
    app->add_option("--input", input, "triangle mesh (OBJ)")->required();
    app->add_option("--output", output, "quad-dominant mesh (OBJ)")->required();
    app->add_option("--dump-graph", dump, "write the matching graph as `u v w [selected]` lines");
    keyed.add("--mode", "mode", "global or greedy");
    keyed.add("--alpha1", "alpha1", "corner regularity weight");
    keyed.add("--alpha2", "alpha2", "principal-direction weight");
    keyed.add("--prefilter", "prefilter", "geometry prefiltering (true/false)");
    keyed.add_verify();
  }

  static std::vector<std::string> keys() {
    std::vector<std::string> k = {"mode", "alpha1", "alpha2", "prefilter"};
    k.insert(k.end(), kVerifyKeys.begin(), kVerifyKeys.end());
    return k;
  }

  int exec(Context& ctx) {
    keyed.overlay(ctx.kv);
    const OperatorConfig cfg = OperatorConfig::from_text(pick(ctx.kv, keys()).to_text());
    const PolyMesh mesh = load_obj(input);
    const MergeResult r = merge(mesh, cfg);
    save_obj(r.mesh, output);
    if (!dump.empty()) {
      std::ostringstream ss;
      write_graph_dump(r.graph, r.matching, ss);
      write_file(dump, ss.str());
    }
    *ctx.out << "merged=" << r.merged << " triangles_left=" << r.triangles_left
             << " weight=" << format_double(r.matching.total_weight) << '\n';
    if (ctx.verbosity > 0) *ctx.err << "candidates=" << r.scored.size() << " flipped=" << r.flipped << '\n';
    return kExitOk;
  }
};

// --- anchors ---------------------------------------------------------------------

struct AnchorsCmd {
  CLI::App* app;
  std::string input, output;

  explicit AnchorsCmd(CLI::App& root)
      : app(root.add_subcommand("anchors", "extract vertices and face centroids from a mesh")) {
    app->add_option("--input", input, "mesh (OBJ)")->required();
    app->add_option("--output", output, "anchor file")->required();
  }

  int exec(Context& ctx) {
    const AnchorSet a = extract_anchors(load_obj(input));
    save_anchors(a, output);
    *ctx.out << "vertices=" << a.vertices.size() << "\ncentroids=" << a.centroids.size() << '\n';
    return kExitOk;
  }
};

// --- assemble --------------------------------------------------------------------

struct AssembleCmd {
  CLI::App* app;
  KeyedOptions keyed;
  std::string anchors, features, oracle, output;
  bool euclidean = false;

  AssembleCmd(CLI::App& root, std::set<std::string>& known)
      : app(root.add_subcommand("assemble", "assemble faces around centroids")), keyed(app, &known) {
    app->add_option("--anchors", anchors, "anchor file")->required();
    auto* f = app->add_option("--features", features, "feature file (vertex rows, then centroid rows)");
    auto* e = app->add_flag("--euclidean", euclidean, "retrieve by coordinate distance");
    auto* o = app->add_option("--oracle", oracle, "retrieve by incidence in this reference mesh (OBJ)");
    f->excludes(e)->excludes(o);
    e->excludes(o);
    app->add_option("--output", output, "assembled mesh (OBJ)")->required();
    keyed.add("--top-k", "top_k", "shortlist size per centroid");
    keyed.add("--pool-max", "pool_max", "largest candidate pool");
    keyed.add_verify();
  }

  int exec(Context& ctx) {
    keyed.overlay(ctx.kv);
    if (features.empty() && oracle.empty() && !euclidean) {
      throw UsageError("assemble needs one of --features, --euclidean, --oracle");
    }
    AssemblyConfig cfg;
    for (const auto& [k, v] : ctx.kv.entries()) {
      if (k == "top_k") cfg.top_k = static_cast<int>(ctx.kv.get_int(k));
      else if (k == "pool_max") cfg.pool_max = static_cast<int>(ctx.kv.get_int(k));
      else cfg.verify.apply(ctx.kv, k);
    }
    cfg.validate();

    const AnchorSet a = load_anchors(anchors);
    std::unique_ptr<FeatureSpace> fs;
    PolyMesh gt;
    if (!features.empty()) {
      fs = std::make_unique<TableFeatures>(load_features(features), a.vertices.size(), a.centroids.size());
    } else if (!oracle.empty()) {
      gt = load_obj(oracle);
      fs = std::make_unique<OracleFeatures>(a, gt);
    } else {
      fs = std::make_unique<EuclideanFeatures>(a);
    }
    const AssembledMesh r = assemble_mesh(a, *fs, cfg);
    save_obj(r.to_mesh(a), output);
    std::size_t quads = 0;
    for (const AssembledFace& f : r.faces) quads += f.kind == FaceKind::kQuad;
    *ctx.out << "faces=" << r.faces.size() << "\nquads=" << quads << "\ntriangles=" << r.faces.size() - quads
             << "\nunresolved=" << r.unresolved.size() << "\nrecon_rate=" << fixed4(r.recon_rate) << '\n';
    if (ctx.verbosity > 0) *ctx.err << "seconds=" << r.seconds << '\n';
    return kExitOk;
  }
};

// --- tokenize / detokenize ---------------------------------------------------------------

TokenizerConfig tokenizer_config(const KvConfig& kv) {
  TokenizerConfig cfg;
  if (kv.has("token_mode")) cfg.mode = parse_token_mode(kv.get("token_mode"));
  if (kv.has("per_axis")) cfg.per_axis_vocab = kv.get_bool("per_axis");
  if (kv.has("resolution")) cfg.resolution = static_cast<int>(kv.get_int("resolution"));
  cfg.validate();
  return cfg;
}

void add_tokenizer_keys(KeyedOptions& keyed) {
  keyed.add("--mode", "token_mode", "single, dual, dual_separate or single_separate");
  keyed.add("--per-axis", "per_axis", "separate vocabulary per axis (true/false)");
  keyed.add("--resolution", "resolution", "quantization levels per axis");
}

struct TokenizeCmd {
  CLI::App* app;
  KeyedOptions keyed;
  std::string input, output;

  TokenizeCmd(CLI::App& root, std::set<std::string>& known)
      : app(root.add_subcommand("tokenize", "anchor file to a token sequence")), keyed(app, &known) {
    app->add_option("--input", input, "anchor file")->required();
    app->add_option("--output", output, "token file, one sequence per line")->required();
    add_tokenizer_keys(keyed);
  }

  int exec(Context& ctx) {
    keyed.overlay(ctx.kv);
    const TokenizerConfig cfg = tokenizer_config(ctx.kv);
    const TokenSequence seq = encode(load_anchors(input), cfg);
    std::ostringstream ss;
    write_token_lines({seq.tokens}, ss);
    write_file(output, ss.str());
    *ctx.out << "tokens=" << seq.tokens.size() << "\nvocab=" << vocab_size(cfg) << '\n';
    return kExitOk;
  }
};

struct DetokenizeCmd {
  CLI::App* app;
  KeyedOptions keyed;
  std::string input, output;

  DetokenizeCmd(CLI::App& root, std::set<std::string>& known)
      : app(root.add_subcommand("detokenize", "token sequence back to an anchor file")), keyed(app, &known) {
    app->add_option("--input", input, "token file with exactly one sequence")->required();
    app->add_option("--output", output, "anchor file")->required();
    add_tokenizer_keys(keyed);
  }

  int exec(Context& ctx) {
    keyed.overlay(ctx.kv);
    const TokenizerConfig cfg = tokenizer_config(ctx.kv);
    std::istringstream in(read_file(input));
    const auto lines = read_token_lines(in);
    if (lines.size() != 1) {
      throw StructureError("expected one token sequence, found " + std::to_string(lines.size()));
    }
    const AnchorSet a = decode(lines.front(), cfg);
    save_anchors(a, output);
    *ctx.out << "vertices=" << a.vertices.size() << "\ncentroids=" << a.centroids.size() << '\n';
    return kExitOk;
  }
};

// --- metrics ---------------------------------------------------------------------

struct MetricsCmd {
  CLI::App* app;
  KeyedOptions keyed;
  std::string gt, pred, report;
  bool cd = false, hd = false, iou = false, qr = false, oep_on = false, efc_on = false, efr_on = false;

  MetricsCmd(CLI::App& root, std::set<std::string>& known)
      : app(root.add_subcommand("metrics", "compare a predicted mesh against a reference")), keyed(app, &known) {
    app->add_option("--gt", gt, "reference mesh (OBJ)")->required();
    app->add_option("--pred", pred, "predicted mesh (OBJ)")->required();
    app->add_option("--report", report, "also write the report here");
    app->add_flag("--cd", cd, "Chamfer distance");
    app->add_flag("--hd", hd, "Hausdorff distance");
    app->add_flag("--iou", iou, "voxel IoU");
    app->add_flag("--qr", qr, "quad ratio of the prediction");
    app->add_flag("--oep", oep_on, "opposite edge parallelism of the prediction");
    app->add_flag("--efc", efc_on, "edge flow continuity of the prediction");
    app->add_flag("--efr", efr_on, "edge flow ratio against reference feature lines");
    keyed.add("--samples", "samples", "surface samples per mesh for CD/HD");
    keyed.add("--voxel-res", "voxel_res", "voxel grid resolution for IoU");
    keyed.add("--tau", "tau", "EFR temperature");
    keyed.config_only({"delta_long", "delta_loop", "ang_long", "ang_loop", "resample_m", "resample_ns",
                       "sharp_dihedral_deg"});
  }

  int exec(Context& ctx) {
    keyed.overlay(ctx.kv);
    long long samples = 100000;
    long long voxel_res = 64;
    EfrConfig efr_cfg;
    for (const auto& [k, v] : ctx.kv.entries()) {
      if (k == "samples") samples = ctx.kv.get_int(k);
      else if (k == "voxel_res") voxel_res = ctx.kv.get_int(k);
      else efr_cfg.apply(ctx.kv, k);
    }
    if (samples < 1) throw RangeError("samples must be >= 1");
    if (voxel_res < 1 || voxel_res > 1024) throw RangeError("voxel_res must lie in [1, 1024]");
    efr_cfg.validate();

    const bool all = !(cd || hd || iou || qr || oep_on || efc_on || efr_on);
    const PolyMesh a = load_obj(gt);
    const PolyMesh b = load_obj(pred);
    std::ostringstream rep;
    auto line = [&](const char* name, auto&& compute) {
      try {
        const double v = compute();
        rep << name << ' ' << format_double(v) << '\n';
      } catch (const UndefinedMetricError&) {
        rep << name << " undefined\n";
      }
    };
    if (all || cd || hd) {
      const auto n = static_cast<std::size_t>(samples);
      const SampledSurface sa = sample_surface(a, n, ctx.seed);
      const SampledSurface sb = sample_surface(b, n, ctx.seed + 1);
      if (all || cd) line("cd", [&] { return chamfer(sa.points, sb.points); });
      if (all || hd) line("hd", [&] { return hausdorff(sa.points, sb.points); });
    }
    if (all || iou) line("iou", [&] { return voxel_iou(a, b, static_cast<int>(voxel_res)).value; });
    if (all || qr) line("qr", [&] { return quad_ratio(b); });
    if (all || oep_on) line("oep", [&] { return oep(b); });
    if (all || efc_on) line("efc", [&] { return efc(b); });
    if (all || efr_on) line("efr", [&] { return efr(a, b, efr_cfg).value; });
    *ctx.out << rep.str();
    if (!report.empty()) write_file(report, rep.str());
    return kExitOk;
  }
};

// --- goldberg --------------------------------------------------------------------

struct GoldbergCmd {
  CLI::App* app;
  int m = 1, n = 0;
  std::string output, placement = "centroid";
  bool validate = false;

  explicit GoldbergCmd(CLI::App& root) : app(root.add_subcommand("goldberg", "Goldberg polyhedron GP(m, n)")) {
    app->add_option("--m", m, "first frequency")->required();
    app->add_option("--n", n, "second frequency, 0 <= n <= m")->required();
    app->add_option("--output", output, "polyhedron (OBJ); stdout when omitted");
    app->add_option("--placement", placement, "dual vertex placement")
        ->check(CLI::IsMember({"centroid", "polar"}));
    app->add_flag("--validate", validate, "check vertex, edge and face counts");
  }

  int exec(Context& ctx) {
    const GoldbergParams p{m, n};
    p.validate();
    const PolyMesh g = goldberg(p, placement == "polar" ? DualPlacement::kPolar : DualPlacement::kCentroid);
    // With the OBJ on stdout the report moves to stderr.
    std::ostream& rep = output.empty() ? *ctx.err : *ctx.out;
    if (output.empty()) write_obj(g, *ctx.out);
    else save_obj(g, output);
    if (!validate) return kExitOk;
    const CountReport r = validate_counts(g, p);
    rep << r.summary() << '\n';
    return r.passed() ? kExitOk : kExitData;
  }
};

// --- linkloss --------------------------------------------------------------------

struct LinklossCmd {
  CLI::App* app;
  CLI::App* eval;
  CLI::App* schedule;
  KeyedOptions keyed;
  std::string batch, gt;
  int k = 20;
  double margin = 0.2;
  bool all_negatives = false;
  int epoch = 0;

  LinklossCmd(CLI::App& root, std::set<std::string>& known)
      : app(root.add_subcommand("linkloss", "triplet loss with hard negative mining")),
        eval(app->add_subcommand("eval", "loss of a feature table against reference incidence")),
        schedule(app->add_subcommand("schedule", "mining k and margin at an epoch")),
        keyed(schedule, &known) {
    app->require_subcommand(1);
    eval->add_option("--batch", batch, "feature file (vertex rows, then centroid rows)")->required();
    eval->add_option("--gt", gt, "reference mesh giving positives and negatives (OBJ)")->required();
    eval->add_option("--k", k, "hard negatives per triplet")->check(CLI::PositiveNumber);
    eval->add_option("--margin", margin, "triplet margin")->check(CLI::NonNegativeNumber);
    eval->add_flag("--all", all_negatives, "use every negative (no mining)");
    schedule->add_option("--epoch", epoch, "epoch index")->required()->check(CLI::NonNegativeNumber);
    keyed.add("--k-min", "k_min", "k at epoch 0");
    keyed.add("--k-max", "k_max", "k at the last epoch");
    keyed.add("--margin-start", "margin_start", "margin at epoch 0");
    keyed.add("--margin-end", "margin_end", "margin at the last epoch");
    keyed.add("--epochs", "total_epochs", "schedule length");
  }

  int exec(Context& ctx) {
    if (eval->parsed()) {
      const FeatureTable table = load_features(batch);
      const EmbeddingBatch b = batch_from_mesh(table, load_obj(gt));
      const double loss = all_negatives ? triplet_loss_all(b, margin)
                                        : triplet_loss(b, static_cast<std::size_t>(k), margin);
      *ctx.out << "loss=" << format_double(loss) << "\ntriplets=" << b.triplets.size() << '\n';
      return kExitOk;
    }
    keyed.overlay(ctx.kv);
    MiningSchedule s;
    for (const auto& [key, v] : ctx.kv.entries()) {
      if (key == "k_min") s.k_min = static_cast<int>(ctx.kv.get_int(key));
      else if (key == "k_max") s.k_max = static_cast<int>(ctx.kv.get_int(key));
      else if (key == "margin_start") s.margin_start = ctx.kv.get_double(key);
      else if (key == "margin_end") s.margin_end = ctx.kv.get_double(key);
      else if (key == "total_epochs") s.total_epochs = static_cast<int>(ctx.kv.get_int(key));
    }
    s.validate();
    *ctx.out << "k=" << k_schedule(epoch, s) << "\nmargin=" << format_double(margin_schedule(epoch, s))
             << '\n';
    return kExitOk;
  }
};

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Quad-dominant mesh toolkit", "qdm"};
  app.require_subcommand(1, 1);
  app.fallthrough();
  std::string config_path;
  std::uint64_t seed = 0;
  int threads = 0;
  int verbosity = 0;
  auto* seed_opt = app.add_option("--seed", seed, "random seed");
  auto* threads_opt = app.add_option("--threads", threads, "worker threads, 0 = all")->check(CLI::NonNegativeNumber);
  app.add_option("--config", config_path, "key=value defaults; flags win");
  app.add_flag("-v,--verbose", verbosity, "diagnostics on stderr");

  std::set<std::string> known = {"seed", "threads"};
  Tri2QuadCmd tri2quad(app, known);
  AssembleCmd assemble(app, known);
  TokenizeCmd tokenize(app, known);
  DetokenizeCmd detokenize(app, known);
  MetricsCmd metrics(app, known);
  GoldbergCmd goldberg_cmd(app);
  LinklossCmd linkloss(app, known);
  AnchorsCmd anchors(app);

  try {
    app.parse(std::vector<std::string>(args.rbegin(), args.rend()));
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    const bool unknown = !args.empty() && args.front().rfind('-', 0) != 0 &&
                         app.get_subcommand_no_throw(args.front()) == nullptr;
    if (unknown) err << "error: unknown subcommand '" << args.front() << "'\n\n" << app.help();
    else err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  Context ctx{{}, 0, verbosity, &out, &err};
  try {
    if (!config_path.empty()) {
      ctx.kv = KvConfig::parse(read_file(config_path));
      for (const std::string& k : ctx.kv.keys()) {
        if (!known.count(k)) throw ParseError("unknown config key '" + k + "' in " + config_path, 0);
      }
    }
    ctx.seed = ctx.kv.has("seed") ? static_cast<std::uint64_t>(ctx.kv.get_int("seed")) : 0;
    if (seed_opt->count() > 0) ctx.seed = seed;
    if (threads_opt->count() == 0 && ctx.kv.has("threads")) threads = static_cast<int>(ctx.kv.get_int("threads"));
    if (threads < 0) throw RangeError("threads must be >= 0");
    if (threads > 0) omp_set_num_threads(threads);

    if (tri2quad.app->parsed()) return tri2quad.exec(ctx);
    if (assemble.app->parsed()) return assemble.exec(ctx);
    if (tokenize.app->parsed()) return tokenize.exec(ctx);
    if (detokenize.app->parsed()) return detokenize.exec(ctx);
    if (metrics.app->parsed()) return metrics.exec(ctx);
    if (goldberg_cmd.app->parsed()) return goldberg_cmd.exec(ctx);
    if (linkloss.app->parsed()) return linkloss.exec(ctx);
    if (anchors.app->parsed()) return anchors.exec(ctx);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const RangeError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
  err << app.help();
  return kExitUsage;
}

}  // namespace qdm::cli
