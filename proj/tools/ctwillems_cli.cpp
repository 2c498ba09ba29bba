/*
 Copyright 2026 The ctwillems Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/
#include <cstdint>
#include <iostream>
#include <string>
#include <utility>

#include <CLI11.hpp>

#include "ctwillems/experiment.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Data-based continuous-time trajectory pipeline: design a persistently "
                 "exciting input, collect plant data, certify excitation, and reconstruct "
                 "arbitrary trajectories from the records."};
    app.require_subcommand(1);

    std::string config_path;
    std::uint64_t seed = 0;
    bool force = false;
    bool quiet = false;

    const std::pair<const char*, const char*> commands[] = {
        {"design", "design the persistently exciting input sequence"},
        {"collect", "simulate the plant and record the dataset"},
        {"certify", "sweep the excitation rank condition over all offsets"},
        {"reconstruct", "solve for the parameter trajectory and rebuild the target"},
        {"report", "aggregate the stage artifacts into one report"},
        {"all", "run every stage in order"},
    };
    for (const auto& [name, description] : commands) {
        auto* sub = app.add_subcommand(name, description);
        sub->add_option("--config", config_path, "experiment config JSON")->required();
        sub->add_option("--seed", seed, "override the excitation seed");
        sub->add_flag("--force", force, "continue past certification failures");
        sub->add_flag("--quiet", quiet, "suppress progress output");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    const auto* sub = app.get_subcommands().front();
    ctwillems::CliFlags flags;
    if (sub->count("--seed") > 0) flags.seed_override = seed;
    flags.force = force;
    flags.quiet = quiet;
    return ctwillems::run_command(sub->get_name(), config_path, flags, std::cout, std::cerr);
}
