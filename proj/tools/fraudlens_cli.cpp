// fraudlens: batch front end (ingest, score, report, render, synth, serve).

#include <csignal>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "fraudlens/errors.hpp"
#include "fraudlens/service.hpp"
#include "fraudlens/svg.hpp"
#include "fraudlens/synth.hpp"

using namespace fraudlens;

namespace {

nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

struct Common {
  std::string data_dir;
  std::string profiles;
  std::string config;

  void attach(CLI::App* app) {
    app->add_option("-d,--data-dir", data_dir, "Store directory")->required();
    app->add_option("-p,--profiles", profiles, "Profiles JSON (default <data-dir>/profiles.json)");
    app->add_option("-c,--config", config, "Service config JSON (scoring/layout/auth sections)");
  }

  ServiceConfig service_config() const {
    ServiceConfig cfg;
    cfg.data_dir = data_dir;
    if (!profiles.empty()) cfg.profiles_path = profiles;
    if (!config.empty()) cfg.merge_json(read_json_file(config));
    return cfg;
  }
};

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::trunc);
  out << text;
  if (!out) throw IngestError("cannot write " + path);
}

Service* g_service = nullptr;

void on_signal(int) {
  if (g_service) g_service->shutdown();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fraudlens: occupational-fraud scoring and investigation"};
  app.require_subcommand(1);

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Append event or login records to the store");
  std::string data_dir, format = "jsonl", mapping_path;
  std::vector<std::string> inputs;
  bool auth = false;
  ingest->add_option("-d,--data-dir", data_dir, "Store directory")->required();
  ingest->add_option("-f,--format", format, "jsonl | canonical-jsonl | csv");
  ingest->add_option("-m,--mapping", mapping_path, "CSV column mapping JSON");
  ingest->add_flag("--auth", auth, "Records are login events");
  ingest->add_option("inputs", inputs, "Input files ('-' for stdin)")->required();

  // score
  auto* score = app.add_subcommand("score", "Score the corpus and print severity tables as JSON");
  Common score_opts;
  score_opts.attach(score);
  bool score_pairs = false;
  std::string score_out;
  score->add_flag("--pairs", score_pairs, "Include pair scores");
  score->add_option("-o,--out", score_out, "Output file (default stdout)");

  // report
  auto* report = app.add_subcommand("report", "Write severity tables as CSV");
  Common report_opts;
  report_opts.attach(report);
  bool report_pairs = false;
  std::string report_out;
  report->add_flag("--pairs", report_pairs, "Include pair rows");
  report->add_option("-o,--out", report_out, "Output file (default stdout)");

  // render
  auto* render = app.add_subcommand("render", "Render animation frames to SVG files");
  Common render_opts;
  render_opts.attach(render);
  double threshold = 0.6;
  std::string out_dir = "frames";
  std::size_t limit = 0;
  bool with_json = false;
  std::string employee;
  render->add_option("-t,--threshold", threshold, "Severity threshold for the playlist");
  render->add_option("-o,--out-dir", out_dir, "Output directory");
  render->add_option("-n,--limit", limit, "Render at most this many frames (0 = all)");
  render->add_option("-e,--employee", employee, "Render only this employee's frame");
  render->add_flag("--json", with_json, "Also write each FrameScene as JSON");

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a seeded synthetic corpus into a store");
  std::string synth_dir, spec_path;
  std::optional<std::uint64_t> seed;
  std::optional<double> scale;
  synth->add_option("-d,--data-dir", synth_dir, "Store directory to fill")->required();
  synth->add_option("-s,--spec", spec_path, "Generator spec JSON");
  synth->add_option("--seed", seed, "Override the spec seed");
  synth->add_option("--scale", scale, "Scale employees and clients");

  // serve
  auto* serve = app.add_subcommand("serve", "Run the HTTP service");
  Common serve_opts;
  serve_opts.attach(serve);
  std::string host = "127.0.0.1";
  int port = 8080;
  serve->add_option("--host", host, "Bind address");
  serve->add_option("--port", port, "Port (0 picks a free one)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*ingest) {
      EventStore store(data_dir);
      std::optional<CsvMapping> mapping;
      if (!mapping_path.empty()) mapping = CsvMapping::from_json(read_json_file(mapping_path));
      const auto fmt = IngestFormat::parse(format, mapping);
      std::size_t accepted = 0, rejected = 0;
      for (const auto& path : inputs) {
        IngestResult r;
        if (path == "-") {
          r = auth ? store.ingest_auth_records(std::cin, fmt) : store.ingest_records(std::cin, fmt);
        } else {
          std::ifstream in(path);
          if (!in) throw IngestError("cannot open " + path);
          r = auth ? store.ingest_auth_records(in, fmt) : store.ingest_records(in, fmt);
        }
        for (const auto& e : r.errors) std::cerr << path << ":" << e.line << ": " << e.message << "\n";
        accepted += r.count;
        rejected += r.errors.size();
      }
      std::cout << nlohmann::json{{"accepted", accepted}, {"rejected", rejected}}.dump() << "\n";
      return 0;
    }
    if (*score) {
      Service svc(score_opts.service_config());
      const auto t = svc.tables();
      for (const auto& w : t->warnings) std::cerr << "warning: " << w << "\n";
      write_output(score_out, to_json(*t, score_pairs).dump(2) + "\n");
      return 0;
    }
    if (*report) {
      Service svc(report_opts.service_config());
      write_output(report_out, to_csv(*svc.tables(), report_pairs));
      return 0;
    }
    if (*render) {
      Service svc(render_opts.service_config());
      const auto ctx = svc.layout_context();
      std::vector<std::string> frames;
      if (!employee.empty()) frames.push_back(employee);
      else frames = build_playlist(*svc.tables(), threshold);
      if (limit > 0 && frames.size() > limit) frames.resize(limit);
      std::filesystem::create_directories(out_dir);
      std::size_t k = 0;
      for (const auto& id : frames) {
        const auto scene = build_frame_scene(ctx, id);
        char prefix[32];
        std::snprintf(prefix, sizeof prefix, "frame-%04zu-", ++k);
        const auto base = std::filesystem::path(out_dir) / (prefix + id);
        write_output(base.string() + ".svg", render_svg(scene));
        if (with_json) write_output(base.string() + ".json", to_json(scene).dump(2) + "\n");
      }
      std::cout << nlohmann::json{{"frames", frames.size()}, {"out_dir", out_dir}}.dump() << "\n";
      return 0;
    }
    if (*synth) {
      SyntheticSpec spec;
      if (!spec_path.empty()) spec = SyntheticSpec::from_json(read_json_file(spec_path));
      if (seed) spec.seed = *seed;
      if (scale) spec = spec.scaled(*scale);
      const auto corpus = generate_synthetic_corpus(spec);
      EventStore store(synth_dir);
      persist_corpus(corpus, store, synth_dir);
      std::cout << corpus.manifest.at("stats").dump() << "\n";
      return 0;
    }
    if (*serve) {
      auto cfg = serve_opts.service_config();
      cfg.host = host;
      cfg.port = port;
      Service svc(cfg);
      const int bound = svc.bind();
      g_service = &svc;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      std::cerr << "listening on " << host << ":" << bound << "\n";
      svc.run();
      g_service = nullptr;
      return 0;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
