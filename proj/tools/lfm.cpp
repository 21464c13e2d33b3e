#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "lfm/report.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Labor-force driven inflation and unemployment models"};
    app.set_version_flag("--version", LFM_VERSION);

    std::string command;
    lfm::RunSpec spec;
    std::string breaks;
    int horizon = -1;

    app.add_option("command", command, "validate | fit | predict | diagnose | forecast | report | synthesize")
        ->required()
        ->check(CLI::IsMember({"validate", "fit", "predict", "diagnose", "forecast", "report", "synthesize"}));
    app.add_option("--manifest", spec.manifest, "data manifest (JSON)");
    app.add_option("--config", spec.config, "run configuration (JSON)");
    app.add_option("--preset", spec.preset, "shipped model, e.g. ue-monthly");
    app.add_option("--model", spec.model, "fitted model document (JSON), overrides --preset");
    app.add_option("--target", spec.target, "role to fit (UE, DGDP, CPI)");
    app.add_option("--out", spec.out_dir, "output directory")->capture_default_str();
    app.add_option("--seed", spec.seed, "seed for synthetic data")->capture_default_str();
    app.add_option("--from", spec.from, "drop data before this period");
    app.add_option("--breaks", breaks, "comma-separated first periods of new segments");
    app.add_option("--horizon", horizon, "forecast horizon in periods");
    app.add_option("--origin", spec.origin, "last known period for forecast");

    CLI11_PARSE(app, argc, argv);

    spec.command = lfm::parse_command(command);
    if (horizon >= 0) spec.horizon = horizon;
    if (!breaks.empty()) {
        std::size_t pos = 0;
        while (pos <= breaks.size()) {
            const auto comma = breaks.find(',', pos);
            const auto item = breaks.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
            if (!item.empty()) spec.breaks.push_back(item);
            if (comma == std::string::npos) break;
            pos = comma + 1;
        }
    }
    return lfm::run(spec, std::cout, std::cerr);
}
