// plot2api: operator CLI for the SPGNN plot-based API recommendation stack.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "spgnn/config.hpp"
#include "spgnn/dataset.hpp"
#include "spgnn/errors.hpp"
#include "spgnn/metrics.hpp"
#include "spgnn/plotgen.hpp"
#include "spgnn/recommend.hpp"
#include "spgnn/semantics.hpp"
#include "spgnn/serve.hpp"
#include "spgnn/trainer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json report_to_json(const spgnn::ApReport& report) {
  json per_api = json::object();
  for (const auto& [name, ap] : report.per_api) per_api[name] = ap;
  json counts = json::object();
  for (const auto& [name, n] : report.positive_counts) counts[name] = n;
  return json{{"map", report.map},
              {"per_api", per_api},
              {"positive_counts", counts},
              {"skipped_no_positives", report.skipped_no_positives}};
}

spgnn::ApiSemanticsMatrix semantics_for(const spgnn::ApiVocabulary& vocab,
                                        const std::optional<fs::path>& embeddings,
                                        int embedding_dim) {
  if (embeddings) {
    auto loaded = spgnn::load_embeddings(*embeddings);
    if (loaded.duplicate_count > 0) {
      std::cerr << "warning: " << loaded.duplicate_count
                << " duplicate embedding tokens (last wins)\n";
    }
    if (loaded.table.dim != embedding_dim) {
      spgnn::raise(spgnn::ErrorCode::DimensionMismatch,
                   "embedding file dimension " + std::to_string(loaded.table.dim) +
                       " does not match configured embedding_dim " +
                       std::to_string(embedding_dim));
    }
    return spgnn::build_api_semantics(vocab, loaded.table);
  }
  return spgnn::fallback_semantics(vocab, embedding_dim);
}

void write_provenance(const spgnn::ApiSemanticsMatrix& semantics, const fs::path& path) {
  json j = json::object();
  for (std::size_t i = 0; i < semantics.api_names.size(); ++i) {
    j[semantics.api_names[i]] = spgnn::semantic_source_name(semantics.provenance[i]);
  }
  std::ofstream out(path);
  out << j.dump(2) << "\n";
}

std::map<std::string, std::string> parse_api_map(const std::string& arg) {
  std::map<std::string, std::string> api_map;
  std::stringstream ss(arg);
  std::string pair;
  while (std::getline(ss, pair, ',')) {
    const auto eq = pair.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == pair.size()) {
      spgnn::raise(spgnn::ErrorCode::InvalidArgument,
                   "--map entries must be src=dst, got '" + pair + "'");
    }
    api_map[pair.substr(0, eq)] = pair.substr(eq + 1);
  }
  return api_map;
}

int run_train(const fs::path& config_path) {
  spgnn::TrainSpec spec = spgnn::TrainSpec::load(config_path);
  auto manifest = spgnn::DatasetManifest::load(spec.train_manifest, spec.vocab);

  spgnn::DatasetManifest train_set = manifest, eval_set = manifest;
  if (spec.eval_manifest) {
    eval_set = spgnn::DatasetManifest::load(*spec.eval_manifest, spec.vocab);
  } else {
    std::tie(train_set, eval_set) =
        spgnn::stratified_split(manifest, spec.test_fraction, spec.train.seed, spec.train_only);
  }

  if (spec.model.num_apis == 0) {
    spec.model.num_apis = static_cast<int>(manifest.vocabulary.size());
  }
  auto semantics = semantics_for(manifest.vocabulary, spec.embeddings,
                                 spec.model.embedding_dim);

  fs::create_directories(spec.out_dir);
  write_provenance(semantics, spec.out_dir / "semantics_provenance.json");

  std::cerr << "training: " << train_set.size() << " samples, eval " << eval_set.size()
            << ", apis " << manifest.vocabulary.size() << ", epochs " << spec.train.epochs
            << ", alpha " << spec.train.alpha << "\n";

  spgnn::TrainResult result =
      spgnn::train(spec.model, spec.train, train_set, eval_set, semantics);

  result.final_checkpoint.save(spec.out_dir / "checkpoint_final.bin");
  result.best_checkpoint.save(spec.out_dir / "checkpoint_best.bin");
  result.history.save_jsonl(spec.out_dir / "history.jsonl");
  train_set.save(spec.out_dir / "train_split.jsonl");
  eval_set.save(spec.out_dir / "eval_split.jsonl");

  const auto final_ckpt = spgnn::Checkpoint::load(spec.out_dir / "checkpoint_final.bin");
  const auto report = spgnn::evaluate(final_ckpt, eval_set);
  {
    std::ofstream out(spec.out_dir / "ap_report.json");
    out << report_to_json(report).dump(2) << "\n";
  }
  std::cout << report.human_table();
  std::cerr << "wrote " << (spec.out_dir / "checkpoint_final.bin").string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"plot-based graphic API recommendation (SPGNN)"};
  app.require_subcommand(1);

  // gen-corpus
  auto* gen = app.add_subcommand("gen-corpus", "render a synthetic labeled plot corpus");
  std::string gen_spec, gen_out;
  gen->add_option("--spec", gen_spec, "corpus spec JSON")->required();
  gen->add_option("--out", gen_out, "output directory")->required();

  // train
  auto* train_cmd = app.add_subcommand("train", "train a model from a config file");
  std::string train_config;
  train_cmd->add_option("--config", train_config, "train config JSON")->required();

  // evaluate
  auto* eval_cmd = app.add_subcommand("evaluate", "evaluate a checkpoint on a manifest");
  std::string eval_ckpt, eval_manifest, eval_vocab, eval_out;
  eval_cmd->add_option("--checkpoint", eval_ckpt)->required();
  eval_cmd->add_option("--manifest", eval_manifest)->required();
  eval_cmd->add_option("--vocab", eval_vocab)->required();
  eval_cmd->add_option("--out", eval_out, "write the report JSON here");

  // alpha-sweep
  auto* sweep_cmd = app.add_subcommand("alpha-sweep", "train/evaluate once per alpha");
  std::string sweep_config, sweep_out;
  std::vector<double> sweep_alphas;
  sweep_cmd->add_option("--config", sweep_config, "train config JSON")->required();
  sweep_cmd->add_option("--alphas", sweep_alphas, "alpha values")->required()->delimiter(',');
  sweep_cmd->add_option("--out", sweep_out, "write the comparison JSON here");

  // cross-eval
  auto* cross_cmd = app.add_subcommand("cross-eval", "evaluate across style families");
  std::string cross_ckpt, cross_manifest, cross_vocab, cross_map, cross_out;
  cross_cmd->add_option("--checkpoint", cross_ckpt)->required();
  cross_cmd->add_option("--manifest", cross_manifest)->required();
  cross_cmd->add_option("--vocab", cross_vocab)->required();
  cross_cmd->add_option("--map", cross_map, "shared APIs as src=dst[,src=dst...]")->required();
  cross_cmd->add_option("--out", cross_out);

  // recommend
  auto* rec_cmd = app.add_subcommand("recommend", "top-k APIs for one plot image");
  std::string rec_ckpt, rec_image;
  int rec_k = 3;
  rec_cmd->add_option("--checkpoint", rec_ckpt)->required();
  rec_cmd->add_option("--image", rec_image, "PPM image")->required();
  rec_cmd->add_option("--k", rec_k, "list length (default 3)");

  // report
  auto* report_cmd = app.add_subcommand("report", "per-API frequency report");
  std::string report_manifest, report_vocab, report_json;
  report_cmd->add_option("--manifest", report_manifest)->required();
  report_cmd->add_option("--vocab", report_vocab)->required();
  report_cmd->add_option("--json", report_json, "machine-readable output path");

  // serve
  auto* serve_cmd = app.add_subcommand("serve", "read-only inference service");
  std::string serve_ckpt, serve_host = "127.0.0.1";
  int serve_port = 8080;
  std::size_t serve_max_mb = 8;
  serve_cmd->add_option("--checkpoint", serve_ckpt)->required();
  serve_cmd->add_option("--host", serve_host);
  serve_cmd->add_option("--port", serve_port);
  serve_cmd->add_option("--max-payload-mb", serve_max_mb);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    std::cerr << "UsageError\n";
    return 2;
  }

  try {
    if (*gen) {
      const auto spec = spgnn::CorpusSpec::load(gen_spec);
      const auto manifest = spgnn::generate_corpus(spec, gen_out);
      std::cout << "generated " << manifest.size() << " samples in " << gen_out
                << " (manifest hash " << std::hex << manifest.content_hash() << std::dec
                << ")\n";
    } else if (*train_cmd) {
      return run_train(train_config);
    } else if (*eval_cmd) {
      const auto ckpt = spgnn::Checkpoint::load(eval_ckpt);
      const auto manifest = spgnn::DatasetManifest::load(eval_manifest, eval_vocab);
      const auto report = spgnn::evaluate(ckpt, manifest);
      std::cout << report.human_table();
      if (!eval_out.empty()) {
        std::ofstream out(eval_out);
        out << report_to_json(report).dump(2) << "\n";
      }
    } else if (*sweep_cmd) {
      spgnn::TrainSpec spec = spgnn::TrainSpec::load(sweep_config);
      const auto manifest = spgnn::DatasetManifest::load(spec.train_manifest, spec.vocab);
      if (spec.model.num_apis == 0) {
        spec.model.num_apis = static_cast<int>(manifest.vocabulary.size());
      }
      const auto semantics = semantics_for(manifest.vocabulary, spec.embeddings,
                                           spec.model.embedding_dim);
      const auto results = spgnn::alpha_sweep(spec.model, spec.train, manifest, semantics,
                                              sweep_alphas, spec.test_fraction);
      json out_json = json::array();
      std::cout << "alpha      mAP\n";
      for (const auto& [alpha, report] : results) {
        char line[64];
        std::snprintf(line, sizeof(line), "%-8.3g %7.4f\n", alpha, report.map);
        std::cout << line;
        out_json.push_back(json{{"alpha", alpha}, {"report", report_to_json(report)}});
      }
      if (!sweep_out.empty()) {
        std::ofstream out(sweep_out);
        out << out_json.dump(2) << "\n";
      }
    } else if (*cross_cmd) {
      const auto ckpt = spgnn::Checkpoint::load(cross_ckpt);
      const auto manifest = spgnn::DatasetManifest::load(cross_manifest, cross_vocab);
      const auto report =
          spgnn::cross_family_evaluate(ckpt, manifest, parse_api_map(cross_map));
      std::cout << report.human_table();
      if (!cross_out.empty()) {
        std::ofstream out(cross_out);
        out << report_to_json(report).dump(2) << "\n";
      }
    } else if (*rec_cmd) {
      const auto ckpt = spgnn::Checkpoint::load(rec_ckpt);
      const auto image = spgnn::load_ppm(rec_image);
      const auto result = spgnn::recommend(ckpt, image, rec_k);
      std::cout << result.to_json_string() << "\n";
    } else if (*report_cmd) {
      const auto manifest = spgnn::DatasetManifest::load(report_manifest, report_vocab);
      const auto freq = spgnn::class_frequency_report(manifest);
      std::cout << "API                      count\n";
      json j = json::array();
      for (const auto& [name, count] : freq) {
        char line[64];
        std::snprintf(line, sizeof(line), "%-22s %7d\n", name.c_str(), count);
        std::cout << line;
        j.push_back(json{{"api", name}, {"count", count}});
      }
      if (!report_json.empty()) {
        std::ofstream out(report_json);
        out << j.dump(2) << "\n";
      }
    } else if (*serve_cmd) {
      const auto ckpt = spgnn::Checkpoint::load(serve_ckpt);
      spgnn::ServeOptions options;
      options.host = serve_host;
      options.port = serve_port;
      options.max_payload_bytes = serve_max_mb * 1024 * 1024;
      return spgnn::run_server(ckpt, options);
    }
  } catch (const spgnn::Error& e) {
    std::cerr << e.what() << "\n";
    return e.code() == spgnn::ErrorCode::NonFiniteLoss ? 3 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
