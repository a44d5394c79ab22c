// Generates a synthetic giants/dwarfs star catalogue in the public file's
// CSV schema, for self-contained runs when the real download is not at
// hand. Deterministic for a given seed.

#include <cstdio>
#include <exception>
#include <string>

#include "CLI11.hpp"
#include "starsvm/synthetic_catalogue.hpp"

int main(int argc, char** argv) {
    CLI::App app{"synthetic giants/dwarfs star catalogue generator"};
    std::string out = "star_catalogue.csv";
    starsvm::SyntheticCatalogueOptions opt;
    app.add_option("--out", out, "output CSV path");
    app.add_option("--rows", opt.clean_rows, "rows that survive cleaning");
    app.add_option("--seed", opt.seed, "generator seed");
    app.add_option("--duplicates", opt.duplicate_rows, "duplicate rows to salt in");
    app.add_option("--missing", opt.missing_rows, "rows with a missing field");
    app.add_option("--bad-plx", opt.nonpositive_plx_rows, "rows with non-positive parallax");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        starsvm::write_synthetic_catalogue(out, opt);
        std::printf("wrote %s (%zu clean + %zu junk rows)\n", out.c_str(), opt.clean_rows,
                    opt.duplicate_rows + opt.missing_rows + opt.nonpositive_plx_rows);
        return 0;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return starsvm::exit_code::io;
    }
}
