#include "rgop/errors.hpp"
#include "rgop/io.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>

namespace {

// Short human-readable summary on stdout; the full record goes to the output files.
void print_summary(const rgop::ResultRecord& rec, const std::vector<std::filesystem::path>& written) {
  for (const auto& [key, value] : rec.outputs.items()) {
    if (value.is_primitive()) std::cout << key << ": " << value.dump() << "\n";
  }
  for (const auto& p : written) std::cout << "wrote " << p.string() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robust growth-optimal portfolio toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", RGOP_VERSION);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir = ".";
  std::string format = "json";

  for (const auto& name : rgop::command_names()) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "JSON run configuration")->required();
    sub->add_option("--seed", seed, "overrides the config seed");
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--format", format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  try {
    auto cfg = rgop::RunConfig::load(config_path);
    if (!cfg.command.empty() && cfg.command != command) {
      throw rgop::Error(rgop::ErrorCode::InvalidArgument,
                        "config is for '" + cfg.command + "' but the command is '" + command + "'");
    }
    cfg.command = command;
    if (seed) cfg.seed = *seed;
    cfg.out_dir = out_dir;
    cfg.format = format == "csv" ? rgop::OutputFormat::Csv : rgop::OutputFormat::Json;

    const auto record = rgop::run_command(cfg);
    print_summary(record, rgop::write_outputs(record, cfg.out_dir, cfg.format));
    return 0;
  } catch (const rgop::Error& e) {
    std::cerr << "error [" << rgop::to_string(e.code()) << "]: " << e.what() << "\n";
    return rgop::exit_code(rgop::category(e.code()));
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
