// Copyright Contributors to the dynscene project
// SPDX-License-Identifier: Apache-2.0
//
// Reference external outpainter. Waits for a bundle in the exchange
// directory, keeps observed pixels, fills the rest with mid-gray and replies.
// --repaint and --drop-frames produce deliberately bad replies for testing.

#include "dynscene/errors.hpp"
#include "dynscene/io/bundle_io.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <thread>

namespace fs = std::filesystem;
using namespace dynscene;

int main(int argc, char** argv) {
    CLI::App app{"Echo outpainter for the dynscene exchange protocol"};
    std::string exchange;
    double timeout_s = 60.0;
    int repaint = 0;
    int drop_frames = 0;
    app.add_option("--exchange", exchange, "Exchange directory")->required();
    app.add_option("--timeout", timeout_s, "Seconds to wait for a bundle");
    app.add_option("--repaint", repaint, "Add this many levels to observed pixels");
    app.add_option("--drop-frames", drop_frames, "Reply with this many fewer frames");
    CLI11_PARSE(app, argc, argv);

    const fs::path bundle_dir = fs::path(exchange) / "bundle";
    const auto deadline = std::chrono::steady_clock::now() +
                          std::chrono::milliseconds(static_cast<long long>(timeout_s * 1000));
    while (!fs::exists(bundle_dir / "manifest.json")) {
        if (std::chrono::steady_clock::now() >= deadline) {
            std::fprintf(stderr, "no bundle appeared in %s\n", bundle_dir.string().c_str());
            return 3;
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(20));
    }
    try {
        const RayConditioningBundle bundle = io::read_bundle(bundle_dir);
        OutpaintResult result;
        result.provenance = "echo";
        const int keep = std::max(0, bundle.frame_count() - drop_frames);
        for (int t = 0; t < keep; ++t) {
            const auto& f = bundle.frames[t];
            RgbImage out = f.partial_rgb;
            for (std::size_t i = 0; i < out.size(); ++i) {
                if (!f.observed[i]) {
                    out[i] = kMidGray;
                } else if (repaint != 0) {
                    auto shift = [&](std::uint8_t v) {
                        return static_cast<std::uint8_t>(std::clamp(v + repaint, 0, 255));
                    };
                    out[i] = Rgb{shift(out[i].r), shift(out[i].g), shift(out[i].b)};
                }
            }
            result.frames.push_back(std::move(out));
        }
        io::write_result(fs::path(exchange) / "result", result, bundle.width(), bundle.height());
    } catch (const Error& e) {
        std::fprintf(stderr, "echo outpainter: %s\n", e.what());
        return 4;
    }
    return 0;
}
