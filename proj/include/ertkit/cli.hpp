#ifndef ERTKIT_CLI_HPP
#define ERTKIT_CLI_HPP

#include <string>

#include "ertkit/config.hpp"

namespace ertkit {

/// Artifact layout under one output root. Commands communicate solely
/// through these files; every path is derived, never configured
/// individually.
struct ArtifactPaths {
  std::string root;

  std::string lexicon_dir() const { return root + "/lexicon"; }
  std::string tokens_dir() const { return root + "/tokens"; }
  std::string models_dir() const { return root + "/models"; }
  std::string contrasts_dir() const { return root + "/contrasts"; }
  std::string decomp_dir() const { return root + "/decomp"; }
  std::string bootstrap_dir() const { return root + "/bootstrap"; }
  std::string report_dir() const { return root + "/report"; }

  std::string lexicon() const { return lexicon_dir() + "/lexicon.tsv"; }
  std::string lexicon_meta() const {
    return lexicon_dir() + "/lexicon_meta.txt";
  }
  std::string synth_tokens() const { return tokens_dir() + "/synthetic.tsv"; }
  std::string truth() const { return tokens_dir() + "/truth.json"; }
  std::string surprisal() const { return tokens_dir() + "/surprisal.tsv"; }
  std::string tokens() const { return tokens_dir() + "/tokens.tsv"; }
  std::string ingest_report() const {
    return tokens_dir() + "/ingest_report.txt";
  }
  std::string model(Family fam, Group g) const;
  std::string selection(Family fam, Group g) const;
  std::string validation() const { return models_dir() + "/validation.tsv"; }
  std::string contrasts() const { return contrasts_dir() + "/contrasts.tsv"; }
  std::string zipf_bins() const { return contrasts_dir() + "/zipf_bins.tsv"; }
  std::string slope_ratios() const {
    return contrasts_dir() + "/slope_ratios.tsv";
  }
  std::string zipf_sr_bins() const {
    return contrasts_dir() + "/zipf_sr_bins.tsv";
  }
  std::string decomposition() const {
    return decomp_dir() + "/decomposition.tsv";
  }
  std::string attribution_configs() const {
    return decomp_dir() + "/attribution_configs.tsv";
  }
  std::string bootstrap() const { return bootstrap_dir() + "/bootstrap.tsv"; }
  std::string fig_data(int fig) const;
  std::string fig_svg(int fig) const;
  std::string summary(int hypothesis) const;
  std::string report_text() const { return report_dir() + "/report.txt"; }
};

/// Pipeline stages. Each reads its inputs from the artifact layout (or
/// the configured external paths), writes its artifacts, and prints a
/// short deterministic summary to stdout. Validation problems throw
/// validation_error, numerical failures numeric_error; run_cli maps
/// those to exit codes 1 and 2.
void cmd_synth(const RunConfig& cfg);
void cmd_build_lexicon(const RunConfig& cfg);
void cmd_align_surprisal(const RunConfig& cfg);
void cmd_ingest(const RunConfig& cfg);
void cmd_fit(const RunConfig& cfg);
void cmd_contrast(const RunConfig& cfg);
void cmd_slope_ratios(const RunConfig& cfg);
void cmd_decompose(const RunConfig& cfg);
void cmd_bootstrap(const RunConfig& cfg);
void cmd_report(const RunConfig& cfg);

/// Full argument-vector entry point: subcommand dispatch, config file
/// loading, --set overrides. Returns the process exit code (0 success,
/// 1 validation error, 2 numerical failure).
int run_cli(int argc, const char* const* argv);

}  // namespace ertkit

#endif
