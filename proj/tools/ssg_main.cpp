// ssg: command-line front end.
//
// Exit codes: 0 success, 1 task-level failure, 2 usage error.

#include <atomic>
#include <cstdlib>
#include <iostream>
#include <mutex>
#include <random>
#include <regex>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "ssg/cfg.hpp"
#include "ssg/dataset.hpp"
#include "ssg/eval.hpp"
#include "ssg/html.hpp"
#include "ssg/mermaid.hpp"
#include "ssg/mini.hpp"
#include "ssg/raster.hpp"
#include "ssg/repair.hpp"
#include "ssg/segmentation.hpp"
#include "ssg/util.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct GlobalConfig {
  std::string backend = "mock:scenarios.json";
  int max_rounds = 3;
  int timeout = 60;
  std::string format = "text";
  int verbosity = 1;
  std::uint64_t seed = 7;
  std::string endpoint;
  std::string token_var = "SSG_API_TOKEN";
  std::string model = "default";
  int concurrency = 4;
  std::map<std::string, std::string> source;  // field -> default|config|env|flag
};

json to_json(const GlobalConfig& c) {
  return {{"backend", c.backend}, {"max_rounds", c.max_rounds}, {"timeout", c.timeout},
          {"format", c.format},   {"verbosity", c.verbosity},   {"seed", c.seed},
          {"endpoint", c.endpoint}, {"token_var", c.token_var}, {"model", c.model},
          {"concurrency", c.concurrency}, {"sources", c.source}};
}

int to_int(const std::string& field, const std::string& v) {
  try {
    std::size_t used = 0;
    const int x = std::stoi(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw UsageError(field + ": expected an integer, got '" + v + "'");
  }
}

// Applies one layer of string-valued settings.
void apply(GlobalConfig& c, const std::map<std::string, std::string>& kv, const std::string& layer) {
  for (const auto& [k, v] : kv) {
    if (k == "backend") c.backend = v;
    else if (k == "max_rounds") c.max_rounds = to_int(k, v);
    else if (k == "timeout") c.timeout = to_int(k, v);
    else if (k == "format") c.format = v;
    else if (k == "verbosity") c.verbosity = to_int(k, v);
    else if (k == "seed") c.seed = static_cast<std::uint64_t>(std::stoull(v));
    else if (k == "endpoint") c.endpoint = v;
    else if (k == "token_var") c.token_var = v;
    else if (k == "model") c.model = v;
    else if (k == "concurrency") c.concurrency = to_int(k, v);
    else throw UsageError("unknown config key '" + k + "' in " + layer);
    c.source[k] = layer;
  }
}

const std::vector<std::pair<std::string, std::string>> kEnvVars = {
    {"SSG_BACKEND", "backend"},   {"SSG_MAX_ROUNDS", "max_rounds"}, {"SSG_TIMEOUT", "timeout"},
    {"SSG_FORMAT", "format"},     {"SSG_VERBOSITY", "verbosity"},   {"SSG_SEED", "seed"},
    {"SSG_ENDPOINT", "endpoint"}, {"SSG_TOKEN_VAR", "token_var"},   {"SSG_MODEL", "model"},
    {"SSG_CONCURRENCY", "concurrency"}};

struct Cli {
  GlobalConfig cfg;
  std::string config_file;
  std::map<std::string, std::string> flags;
  bool print_config = false;

  void resolve() {
    for (const auto& f : {"backend", "max_rounds", "timeout", "format", "verbosity", "seed", "endpoint", "token_var",
                          "model", "concurrency"})
      cfg.source[f] = "default";
    if (!config_file.empty()) {
      json j;
      try {
        j = json::parse(ssg::read_file(config_file));
      } catch (const std::exception& e) {
        throw UsageError("cannot read config file " + config_file + ": " + e.what());
      }
      if (!j.is_object()) throw UsageError("config file must hold a JSON object");
      std::map<std::string, std::string> kv;
      for (const auto& [k, v] : j.items()) kv[k] = v.is_string() ? v.get<std::string>() : v.dump();
      apply(cfg, kv, "config");
    }
    std::map<std::string, std::string> env;
    for (const auto& [var, key] : kEnvVars)
      if (const char* v = std::getenv(var.c_str()); v && *v) env[key] = v;
    apply(cfg, env, "env");
    apply(cfg, flags, "flag");
    if (cfg.format != "json" && cfg.format != "csv" && cfg.format != "text")
      throw UsageError("format must be json, csv or text");
    if (cfg.max_rounds < 1) throw UsageError("max_rounds must be at least 1");
    if (cfg.timeout < 1) throw UsageError("timeout must be positive");
  }

  ssg::model::RemoteConfig remote() const {
    ssg::model::RemoteConfig r;
    r.endpoint = cfg.endpoint;
    r.token_env = cfg.token_var;
    r.model = cfg.model;
    r.timeout = std::chrono::seconds(cfg.timeout);
    r.concurrency = cfg.concurrency;
    return r;
  }
  bool explicit_(const std::string& k) const { return cfg.source.at(k) != "default"; }
};

void emit(const std::string& data, const std::string& out) {
  if (out.empty() || out == "-")
    std::cout << data;
  else
    ssg::write_file(out, data);
}

std::string glob_to_regex(const std::string& pat) {
  std::string r;
  for (char c : pat) {
    if (c == '*') r += "[^/]*";
    else if (c == '?') r += "[^/]";
    else if (std::isalnum(static_cast<unsigned char>(c))) r += c;
    else r += std::string("\\") + c;
  }
  return r;
}

// Shell-unexpanded patterns are matched against the file names of their directory.
std::vector<fs::path> expand_globs(const std::vector<std::string>& pats) {
  std::vector<fs::path> out;
  for (const auto& p : pats) {
    if (p.find_first_of("*?") == std::string::npos) {
      out.emplace_back(p);
      continue;
    }
    fs::path pp(p);
    const auto dir = pp.parent_path().empty() ? fs::path(".") : pp.parent_path();
    const std::regex re(glob_to_regex(pp.filename().string()));
    std::vector<fs::path> hits;
    if (fs::is_directory(dir))
      for (const auto& e : fs::directory_iterator(dir))
        if (e.is_regular_file() && std::regex_match(e.path().filename().string(), re)) hits.push_back(e.path());
    std::sort(hits.begin(), hits.end());
    out.insert(out.end(), hits.begin(), hits.end());
  }
  return out;
}

ssg::BoundingBox parse_box(const std::string& s) {
  static const std::regex re(R"(\s*\[?\s*(-?\d+)\s*,\s*(-?\d+)\s*,\s*(\d+)\s*,\s*(\d+)\s*\]?\s*)");
  std::smatch m;
  if (!std::regex_match(s, m, re)) throw UsageError("box must be x,y,w,h: '" + s + "'");
  return {std::stoi(m[1]), std::stoi(m[2]), std::stoi(m[3]), std::stoi(m[4])};
}

std::string text_arg(const std::string& v) { return !v.empty() && v[0] == '@' ? ssg::read_file(v.substr(1)) : v; }

std::string fmt6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string fmt_full(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

int main(int argc, char** argv) {
  if (!std::getenv("SSG_EXE")) {
    std::error_code ec;
    auto self = fs::read_symlink("/proc/self/exe", ec);
    if (!ec) ::setenv("SSG_EXE", self.c_str(), 1);
  }

  Cli cli;
  CLI::App app{"Semantic scene graph toolkit: extraction, Mermaid, metrics, segmentation and repair"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config();  // disable CLI11's own config handling
  std::string backend, format, seed, timeout, max_rounds, verbosity;
  app.add_option("--config", cli.config_file, "JSON config file")->check(CLI::ExistingFile);
  app.add_option("--backend", backend, "mock:<scenarios.json> | http:<url>");
  app.add_option("--format", format, "json | csv | text");
  app.add_option("--seed", seed, "random seed");
  app.add_option("--timeout", timeout, "seconds per test run / model call");
  app.add_option("--max-rounds", max_rounds, "repair rounds per task");
  app.add_option("--verbosity", verbosity, "0 quiet, 1 normal, 2 debug");
  app.add_flag("--print-config", cli.print_config, "print the resolved configuration and exit");

  std::function<int()> action;
  std::string out;

  // mermaid ---------------------------------------------------------------
  auto* mm = app.add_subcommand("mermaid", "Mermaid serialization");
  mm->require_subcommand(1);
  std::string in_file;
  std::vector<std::string> patterns;
  auto* mm_enc = mm->add_subcommand("encode", "SSG JSON -> Mermaid");
  mm_enc->add_option("ssg", in_file)->required()->check(CLI::ExistingFile);
  mm_enc->add_option("-o,--output", out);
  mm_enc->callback([&] {
    action = [&] {
      emit(ssg::mermaid::serialize(ssg::load_graph(in_file)), out);
      return 0;
    };
  });
  auto* mm_dec = mm->add_subcommand("decode", "Mermaid -> SSG JSON");
  mm_dec->add_option("doc", in_file)->required()->check(CLI::ExistingFile);
  mm_dec->add_option("-o,--output", out);
  mm_dec->callback([&] {
    action = [&] {
      emit(ssg::dump_graph(ssg::mermaid::parse(ssg::read_file(in_file))), out);
      return 0;
    };
  });
  auto* mm_chk = mm->add_subcommand("check", "rendering accuracy over documents");
  mm_chk->add_option("files", patterns, "files or glob patterns")->required();
  mm_chk->callback([&] {
    action = [&] {
      const auto files = expand_globs(patterns);
      if (files.empty()) throw UsageError("no documents match");
      std::vector<std::string> docs;
      json failures = json::array();
      for (const auto& f : files) {
        docs.push_back(ssg::read_file(f));
        try {
          ssg::mermaid::parse(docs.back());
        } catch (const std::exception& e) {
          failures.push_back({{"file", f.generic_string()}, {"error", e.what()}});
        }
      }
      const double acc = ssg::mermaid::rendering_accuracy(docs);
      const auto valid = docs.size() - failures.size();
      if (cli.cfg.format == "json") {
        std::cout << json{{"documents", docs.size()}, {"valid", valid}, {"rendering_accuracy", acc},
                          {"failures", failures}}
                         .dump(2)
                  << "\n";
      } else if (cli.cfg.format == "csv") {
        std::cout << "documents,valid,rendering_accuracy\n"
                  << docs.size() << "," << valid << "," << fmt6(acc) << "\n";
      } else {
        for (const auto& f : failures)
          std::cerr << f["file"].get<std::string>() << ": " << f["error"].get<std::string>() << "\n";
        std::cout << "rendering_accuracy " << fmt6(acc) << " (" << valid << "/" << docs.size() << ")\n";
      }
      return 0;
    };
  });

  // extract -----------------------------------------------------------------
  auto* ex = app.add_subcommand("extract", "artifact -> SSG");
  ex->require_subcommand(1);
  bool defuse = false;
  auto* ex_html = ex->add_subcommand("html", "HTML document -> SSG");
  ex_html->add_option("file", in_file)->required()->check(CLI::ExistingFile);
  ex_html->add_option("-o,--output", out);
  ex_html->callback([&] {
    action = [&] {
      emit(ssg::dump_graph(ssg::html::dom_to_ssg(ssg::html::parse_html(ssg::read_file(in_file)))), out);
      return 0;
    };
  });
  auto* ex_cfg = ex->add_subcommand("cfg", "mini-language program -> CFG SSG");
  ex_cfg->add_option("file", in_file)->required()->check(CLI::ExistingFile);
  ex_cfg->add_flag("--defuse", defuse, "add def-use data-flow edges");
  ex_cfg->add_option("-o,--output", out);
  ex_cfg->callback([&] {
    action = [&] {
      auto c = ssg::cfg::build_cfg(ssg::mini::parse_mini(ssg::read_file(in_file)));
      auto g = ssg::cfg::cfg_to_ssg(c);
      if (defuse) g = ssg::cfg::add_defuse_edges(g, c);
      emit(ssg::dump_graph(g), out);
      return 0;
    };
  });

  // eval --------------------------------------------------------------------
  auto* ev = app.add_subcommand("eval", "metrics");
  ev->require_subcommand(1);
  std::string file_a, file_b;
  int width = 640, height = 480;
  auto* ev_ssim = ev->add_subcommand("ssim", "SSIM between two PGM rasters");
  ev_ssim->add_option("a", file_a)->required()->check(CLI::ExistingFile);
  ev_ssim->add_option("b", file_b)->required()->check(CLI::ExistingFile);
  ev_ssim->callback([&] {
    action = [&] {
      const double v = ssg::ssim(ssg::load_pgm(file_a), ssg::load_pgm(file_b));
      if (cli.cfg.format == "json")
        std::cout << json{{"ssim", v}}.dump() << "\n";
      else if (cli.cfg.format == "csv")
        std::cout << "ssim\n" << fmt_full(v) << "\n";
      else
        std::cout << fmt_full(v) << "\n";
      return 0;
    };
  });
  auto* ev_rep = ev->add_subcommand("report", "Pass@1 over recorded outcomes");
  ev_rep->add_option("outcomes", in_file)->required()->check(CLI::ExistingFile);
  ev_rep->add_option("-o,--output", out);
  ev_rep->callback([&] {
    action = [&] {
      const auto outcomes = ssg::outcomes_from_json(json::parse(ssg::read_file(in_file)));
      const auto report = ssg::pass_at_1(outcomes);
      if (cli.cfg.format == "csv")
        emit(ssg::to_csv(report), out);
      else if (cli.cfg.format == "json")
        emit(ssg::to_json(report).dump(2) + "\n", out);
      else
        emit("pass@1 " + fmt6(report.pass_at_1) + " (" + std::to_string(report.resolved) + "/" +
                 std::to_string(report.total) + ")\n",
             out);
      return 0;
    };
  });
  auto* ev_ren = ev->add_subcommand("render", "rasterize an SSG to PGM");
  ev_ren->add_option("ssg", in_file)->required()->check(CLI::ExistingFile);
  ev_ren->add_option("-o,--output", out)->required();
  ev_ren->add_option("--width", width);
  ev_ren->add_option("--height", height);
  ev_ren->callback([&] {
    action = [&] {
      ssg::save_pgm(ssg::rasterize(ssg::load_graph(in_file), {width, height}), out);
      return 0;
    };
  });

  // segment -----------------------------------------------------------------
  auto* sg = app.add_subcommand("segment", "bounding-box segmentation");
  sg->require_subcommand(1);
  std::string issue, key = "segment/segment/1", box_text, out_image, ssg_file;
  auto* sg_prop = sg->add_subcommand("propose", "ask the backend for a bug-relevant region");
  sg_prop->add_option("image", in_file)->required()->check(CLI::ExistingFile);
  sg_prop->add_option("--issue", issue, "issue text or @file")->required();
  sg_prop->add_option("--ssg", ssg_file, "SSG JSON shown as Mermaid")->check(CLI::ExistingFile);
  sg_prop->add_option("--key", key, "scenario key");
  sg_prop->callback([&] {
    action = [&] {
      auto be = ssg::model::make_backend(cli.cfg.backend, cli.remote());
      ssg::segmentation::SegmentationRequest req{ssg::load_pgm(in_file), text_arg(issue), {},
                                                 ssg_file.empty() ? "" : ssg::mermaid::serialize(ssg::load_graph(ssg_file)),
                                                 key};
      auto r = ssg::segmentation::propose_region(req, *be);
      std::cout << json{{"reason", r.reason}, {"bbox", {r.bbox.x, r.bbox.y, r.bbox.w, r.bbox.h}}}.dump(2) << "\n";
      return 0;
    };
  });
  auto* sg_crop = sg->add_subcommand("crop", "crop an SSG and its raster to a box");
  sg_crop->add_option("ssg", ssg_file)->required()->check(CLI::ExistingFile);
  sg_crop->add_option("image", in_file)->required()->check(CLI::ExistingFile);
  sg_crop->add_option("--box", box_text, "x,y,w,h")->required();
  sg_crop->add_option("-o,--output", out, "cropped SSG JSON");
  sg_crop->add_option("--image-out", out_image, "cropped PGM");
  sg_crop->callback([&] {
    action = [&] {
      auto r = ssg::segmentation::crop(ssg::load_graph(ssg_file), ssg::load_pgm(in_file), parse_box(box_text));
      if (r.notice) std::cerr << "ssg: " << *r.notice << "\n";
      emit(ssg::dump_graph(r.graph), out);
      if (!out_image.empty()) ssg::save_pgm(r.image, out_image);
      return 0;
    };
  });

  // repair ------------------------------------------------------------------
  auto* rp = app.add_subcommand("repair", "localize / generate / validate loop");
  rp->require_subcommand(1);
  int jobs = 1;
  std::string sessions_out;
  auto* rp_run = rp->add_subcommand("run", "repair every task in a manifest");
  rp_run->add_option("manifest", in_file)->required()->check(CLI::ExistingFile);
  rp_run->add_option("-o,--output", out, "outcomes JSON");
  rp_run->add_option("-j,--jobs", jobs, "parallel sessions")->check(CLI::PositiveNumber);
  rp_run->add_option("--sessions", sessions_out, "full session logs JSON");
  rp_run->callback([&] {
    action = [&] {
      auto tasks = ssg::repair::load_manifest(in_file);
      for (auto& t : tasks) {
        if (cli.explicit_("max_rounds")) t.max_rounds = cli.cfg.max_rounds;
        if (cli.explicit_("timeout")) t.timeout = std::chrono::seconds(cli.cfg.timeout);
        ssg::repair::check_task(t);
      }
      auto be = ssg::model::make_backend(cli.cfg.backend, cli.remote());
      std::vector<ssg::repair::RepairSession> sessions(tasks.size());
      std::atomic<std::size_t> next{0};
      std::mutex log_mu;
      auto worker = [&] {
        for (std::size_t i; (i = next++) < tasks.size();) {
          sessions[i] = ssg::repair::run_session(tasks[i], {be.get(), nullptr, nullptr});
          std::string buf;
          const auto& s = sessions[i];
          buf += "[" + s.task.id + "] " + std::string(ssg::repair::to_string(s.state)) + " after round " +
                 std::to_string(s.round) + "\n";
          if (cli.cfg.verbosity >= 2)
            for (const auto& e : s.log) buf += "  " + std::to_string(e.round) + " " + e.kind + ": " + e.detail + "\n";
          if (cli.cfg.verbosity >= 1) {
            std::lock_guard lock(log_mu);
            std::cerr << buf;
          }
        }
      };
      std::vector<std::thread> pool;
      for (int k = 1; k < jobs; ++k) pool.emplace_back(worker);
      worker();
      for (auto& th : pool) th.join();

      std::vector<ssg::TaskOutcome> outcomes;
      json logs = json::array();
      for (const auto& s : sessions) {
        outcomes.push_back({s.task.id, s.resolved(), s.round});
        logs.push_back(ssg::repair::to_json(s));
      }
      bool all = true;
      for (const auto& o : outcomes) all = all && o.resolved;
      if (!sessions_out.empty()) ssg::write_file(sessions_out, logs.dump(2) + "\n");
      if (outcomes.empty()) {
        emit(json{{"total", 0}, {"resolved", 0}, {"pass_at_1", nullptr}, {"per_task", json::array()}}.dump(2) + "\n",
             out);
        return 0;
      }
      const auto report = ssg::pass_at_1(outcomes);
      if (cli.cfg.format == "csv")
        emit(ssg::to_csv(report), out);
      else
        emit(ssg::to_json(report).dump(2) + "\n", out);
      if (!out.empty() && out != "-" && cli.cfg.verbosity >= 1)
        std::cerr << "pass@1 " << fmt6(report.pass_at_1) << " (" << report.resolved << "/" << report.total << ")\n";
      return all ? 0 : 1;
    };
  });

  // dataset -----------------------------------------------------------------
  auto* ds = app.add_subcommand("dataset", "corpus builders");
  ds->require_subcommand(1);
  int loc = 20, count = 20, min_loc = 21;
  std::string dir;
  auto* ds_cfg = ds->add_subcommand("build-cfg", "CFG corpus from mini-language sources");
  ds_cfg->add_option("dir", dir)->required()->check(CLI::ExistingDirectory);
  ds_cfg->add_option("--loc", loc, "keep files with LOC above this");
  ds_cfg->add_option("-o,--output", out, "output directory")->required();
  ds_cfg->callback([&] {
    action = [&] {
      auto r = ssg::dataset::build_cfg_corpus(dir, loc, out);
      for (const auto& s : r.skipped) std::cerr << "ssg: skipped " << s << "\n";
      std::cout << json{{"entries", r.entries.size()}, {"skipped", r.skipped.size()}}.dump() << "\n";
      return 0;
    };
  });
  auto* ds_gen = ds->add_subcommand("gen-mini", "random mini-language programs");
  ds_gen->add_option("-n,--count", count)->required();
  ds_gen->add_option("--min-loc", min_loc);
  ds_gen->add_option("-o,--output", out, "output directory")->required();
  ds_gen->callback([&] {
    action = [&] {
      auto files = ssg::dataset::generate_mini_corpus(count, cli.cfg.seed, min_loc, out);
      std::cout << json{{"programs", files.size()}, {"seed", cli.cfg.seed}}.dump() << "\n";
      return 0;
    };
  });
  auto* ds_bug = ds->add_subcommand("seed-bugs", "seeded-bug repair tasks");
  ds_bug->add_option("templates", dir)->required()->check(CLI::ExistingDirectory);
  ds_bug->add_option("-n,--count", count);
  ds_bug->add_option("-o,--output", out, "manifest path (tasks/manifest.json) or directory")->required();
  ds_bug->callback([&] {
    action = [&] {
      fs::path target(out);
      if (target.extension() == ".json") {
        if (target.filename() != "manifest.json") throw UsageError("seed-bugs writes manifest.json; got " + out);
        target = target.parent_path().empty() ? fs::path(".") : target.parent_path();
      }
      auto bugs = ssg::dataset::seed_bugs(dir, count, cli.cfg.seed, target);
      std::map<std::string, int> ops;
      for (const auto& b : bugs) ++ops[b.defect.op];
      std::cout << json{{"tasks", bugs.size()}, {"operators", ops}, {"seed", cli.cfg.seed}}.dump() << "\n";
      return 0;
    };
  });

  // mini --------------------------------------------------------------------
  auto* mn = app.add_subcommand("mini", "mini-language interpreter");
  mn->require_subcommand(1);
  std::vector<std::string> sets;
  auto* mn_run = mn->add_subcommand("run", "run a program");
  mn_run->add_option("file", in_file)->required()->check(CLI::ExistingFile);
  mn_run->add_option("--set", sets, "name=value inputs");
  mn_run->callback([&] {
    action = [&] {
      ssg::cfg::Env env;
      for (const auto& s : sets) {
        const auto eq = s.find('=');
        if (eq == std::string::npos) throw UsageError("--set expects name=value, got '" + s + "'");
        env[s.substr(0, eq)] = to_int(s.substr(0, eq), s.substr(eq + 1));
      }
      auto p = ssg::mini::parse_mini(ssg::read_file(in_file));
      auto r = ssg::cfg::interpret(p, env, 10'000'000);
      json j = {{"env", r.env}, {"trace", r.trace}};
      j["returned"] = r.returned ? json(*r.returned) : json(nullptr);
      std::cout << j.dump(2) << "\n";
      return 0;
    };
  });
  auto* mn_test = mn->add_subcommand("test", "run a program against cases.json");
  mn_test->add_option("file", in_file)->required()->check(CLI::ExistingFile);
  mn_test->add_option("cases", file_b)->required()->check(CLI::ExistingFile);
  mn_test->callback([&] {
    action = [&] {
      auto r = ssg::dataset::run_mini_cases(ssg::read_file(in_file), json::parse(ssg::read_file(file_b)));
      std::cout << r.text;
      return r.ok() ? 0 : 1;
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    if (cli.print_config && e.get_name() == "RequiredError" && app.get_subcommands().empty()) {
      // --print-config alone is fine
    } else {
      std::cerr << "ssg: error: " << e.what() << "\n" << app.help();
      return 2;
    }
  }

  try {
    if (!backend.empty()) cli.flags["backend"] = backend;
    if (!format.empty()) cli.flags["format"] = format;
    if (!seed.empty()) cli.flags["seed"] = seed;
    if (!timeout.empty()) cli.flags["timeout"] = timeout;
    if (!max_rounds.empty()) cli.flags["max_rounds"] = max_rounds;
    if (!verbosity.empty()) cli.flags["verbosity"] = verbosity;
    cli.resolve();
    if (cli.print_config) {
      std::cout << to_json(cli.cfg).dump(2) << "\n";
      return 0;
    }
    if (!action) throw UsageError("no command given");
    return action();
  } catch (const UsageError& e) {
    std::cerr << "ssg: error: " << e.what() << "\n";
    return 2;
  } catch (const ssg::repair::TaskError& e) {
    std::cerr << "ssg: error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "ssg: error: " << e.what() << "\n";
    return 1;
  }
}
