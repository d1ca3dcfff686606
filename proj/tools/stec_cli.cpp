// stec: spatial-temporal embodied carbon from grid generation data.

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "stec/cli.hpp"

int main(int argc, char** argv) {
  using namespace stec;

  CLI::App app{"Spatial-temporal embodied carbon for CPU, memory and storage"};
  app.require_subcommand(1);

  std::string config_path;
  bool lenient = false;
  bool quiet = false;
  app.add_option("--config", config_path, "Project config (INI)")->required();
  app.add_flag("--lenient", lenient, "Skip bad data rows instead of failing");
  app.add_flag("--quiet", quiet, "Less output");

  auto* ingest = app.add_subcommand("ingest", "Validate and summarise the configured data files");

  cli::IntensityArgs ia;
  auto* intensity = app.add_subcommand("intensity", "Carbon intensity per time bucket");
  auto* region_opt = intensity->add_option("--region", ia.region, "Region id");
  intensity->add_option("--zone", ia.zone, "Treaty zone id")->excludes(region_opt);
  intensity->add_option("--bucket", ia.bucket, "hour | day | season | year")->capture_default_str();
  intensity->add_option("--zone-mode", ia.zone_mode, "weighted | unweighted")->capture_default_str();
  intensity->add_option("--out", ia.out, "Output file (.csv or .json)")->capture_default_str();

  cli::EmbodiedArgs ea;
  auto* emb = app.add_subcommand("embodied", "Embodied carbon series for one hardware spec");
  emb->add_option("--hardware", ea.hardware, "e.g. cpu:7nm, memory:10nm DDR4, ssd:Nytro 1551")->capture_default_str();
  emb->add_option("--model", ea.model, "cd | cs | zy | gy")->capture_default_str();
  emb->add_option("--units", ea.units, "Regions or zones")->delimiter(',')->required();
  emb->add_option("--from", ea.from, "Period start (ISO-8601)");
  emb->add_option("--to", ea.to, "Period end, exclusive (ISO-8601)");
  emb->add_option("--out", ea.out, "Output file (.csv or .json)")->capture_default_str();

  cli::CompareArgs ca;
  auto* cmp = app.add_subcommand("compare", "Average/maximum difference against the global-year baseline");
  cmp->add_option("--hardware", ca.hardware, "One or more hardware labels")->delimiter(';');
  cmp->add_option("--model", ca.model, "cd | cs | zy | gy")->capture_default_str();
  cmp->add_option("--units", ca.units, "Regions or zones")->delimiter(',')->required();
  cmp->add_option("--baseline-units", ca.baseline_units, "Units for the baseline (default: --units)")->delimiter(',');
  cmp->add_option("--from", ca.from, "Period start (ISO-8601)");
  cmp->add_option("--to", ca.to, "Period end, exclusive (ISO-8601)");
  cmp->add_option("--out", ca.out, "CSV summary; full JSON is written alongside")->capture_default_str();

  cli::PlotArgs pa;
  auto* plot = app.add_subcommand("plotdata", "Plot-ready CSV");
  plot->add_option("--figure", pa.figure, "cd-timeline | cs-timeline | storm")->capture_default_str();
  plot->add_option("--units", pa.units, "Regions")->delimiter(',')->required();
  plot->add_option("--hardware", pa.hardware, "Hardware label")->capture_default_str();
  plot->add_option("--from", pa.from, "Period start (ISO-8601)");
  plot->add_option("--to", pa.to, "Period end, exclusive (ISO-8601)");
  plot->add_option("--out", pa.out, "Output CSV")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return cli::kUserError;
  }

  return cli::guarded(
      [&]() -> int {
        Project project = load_project(load_config(config_path), lenient);
        if (*ingest) return cli::cmd_ingest(project, std::cout, quiet);
        if (*intensity) return cli::cmd_intensity(project, ia, std::cout, quiet);
        if (*emb) return cli::cmd_embodied(project, ea, std::cout, quiet);
        if (*cmp) return cli::cmd_compare(project, ca, std::cout, quiet);
        return cli::cmd_plotdata(project, pa, std::cout, quiet);
      },
      std::cerr);
}
