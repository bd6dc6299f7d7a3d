#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "checkfield/testkit/synthetic.hpp"

// Writes the bundled synthetic scenarios (check images, replay scripts,
// ground truth, expected detections) so the CLI can be exercised offline.
int main(int argc, char** argv) {
    CLI::App app{"Generate synthetic check fixtures with replay scripts"};
    std::string out_dir;
    app.add_option("--out", out_dir, "output directory")->required();
    CLI11_PARSE(app, argc, argv);

    try {
        checkfield::EngineConfig config;
        checkfield::testkit::write_fixture_set(out_dir, config);
    } catch (const std::exception& e) {
        std::cerr << "fixture generation failed: " << e.what() << '\n';
        return 1;
    }
    std::cout << "fixtures written to " << out_dir << '\n';
    return 0;
}
