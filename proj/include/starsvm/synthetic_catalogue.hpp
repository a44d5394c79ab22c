#pragma once
// Synthetic stand-in for the public "Star Categorization - Giants and
// Dwarfs" catalogue, for self-contained runs when the real file is not
// available. Samples dwarf/giant populations with HR-diagram-shaped
// (B-V, absolute magnitude) structure, writes the same CSV schema and
// column conventions (the file's Amag column applies Vmag + 5*log10(Plx)
// + 5 directly to the milliarcsecond parallax column, as the public file
// does), and salts in duplicate / missing-value / non-positive-parallax
// rows so the cleaning stage has real work to do.

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "starsvm/errors.hpp"
#include "starsvm/rng.hpp"
#include "starsvm/stellar_data.hpp"

namespace starsvm {

struct SyntheticCatalogueOptions {
    std::size_t clean_rows = 39552;
    std::size_t duplicate_rows = 430;
    std::size_t missing_rows = 280;
    std::size_t nonpositive_plx_rows = 90;
    std::uint64_t seed = 20240101;

    double bv_sigma = 0.06;          // observational noise on the colour index
    double ms_sigma = 0.5;           // main-sequence magnitude scatter
    double giant_sigma = 0.5;        // giant-branch magnitude scatter
    double subgiant_fraction = 0.22; // luminosity class IV share of giants
    double special_fraction = 0.013; // non-OBAFGKM spectral strings
    double letter_flip = 0.025;      // chance of a one-step spectral relabel
    double edge_flip = 0.30;         // relabel chance for stars at band edges
    double subclass_centering = 0.85; // 0 = uniform subclasses, 1 = strongly banded
    double target_flip = 0.065;      // dwarf/giant relabel rate; such rows get a
                                     // bare SpType with no luminosity suffix
};

namespace synth_detail {

inline double round_to(double v, int decimals) {
    const double scale = std::pow(10.0, decimals);
    return std::round(v * scale) / scale;
}

inline double piecewise(std::span<const std::pair<double, double>> pts, double x) {
    if (x <= pts.front().first) return pts.front().second;
    for (std::size_t i = 1; i < pts.size(); ++i) {
        if (x <= pts[i].first) {
            const double t = (x - pts[i - 1].first) / (pts[i].first - pts[i - 1].first);
            return pts[i - 1].second + t * (pts[i].second - pts[i - 1].second);
        }
    }
    return pts.back().second;
}

// Main-sequence absolute magnitude vs colour index.
inline double main_sequence_amag(double bv) {
    static const std::array<std::pair<double, double>, 8> pts{{{-0.33, -3.8},
                                                               {-0.02, 0.7},
                                                               {0.30, 2.3},
                                                               {0.58, 3.8},
                                                               {0.81, 5.3},
                                                               {1.40, 7.3},
                                                               {1.60, 8.8},
                                                               {2.10, 12.0}}};
    return piecewise(pts, bv);
}

// Giant-branch absolute magnitude vs colour index.
inline double giant_amag(double bv) {
    static const std::array<std::pair<double, double>, 9> pts{{{-0.30, -2.2},
                                                               {0.00, -1.0},
                                                               {0.30, 0.2},
                                                               {0.60, 1.3},
                                                               {0.87, 2.2},
                                                               {1.05, 2.5},
                                                               {1.30, 0.7},
                                                               {1.60, -1.0},
                                                               {2.40, -3.0}}};
    return piecewise(pts, bv);
}

struct LetterBand {
    char letter;
    double lo;
    double hi;
};

inline const std::array<LetterBand, 7> kBands{{{'O', -0.33, -0.30},
                                               {'B', -0.30, -0.02},
                                               {'A', -0.02, 0.30},
                                               {'F', 0.30, 0.58},
                                               {'G', 0.58, 0.81},
                                               {'K', 0.81, 1.40},
                                               {'M', 1.40, 2.10}}};

// Per-population spectral-letter frequencies (O..M) for a magnitude-limited
// catalogue; late types dominate the giants, early-to-mid types the dwarfs.
inline const std::array<double, 7> kDwarfFreq{0.004, 0.015, 0.200, 0.300, 0.210, 0.195, 0.076};
inline const std::array<double, 7> kGiantFreq{0.003, 0.012, 0.100, 0.170, 0.270, 0.310, 0.135};
// the subgiant branch is dominated by late F through K stars
inline const std::array<double, 7> kSubgiantFreq{0.000, 0.005, 0.035, 0.120, 0.430, 0.380, 0.030};

inline std::size_t sample_index(std::span<const double> freq, Rng& rng) {
    const double u = rng.next_unit();
    double acc = 0.0;
    for (std::size_t i = 0; i < freq.size(); ++i) {
        acc += freq[i];
        if (u < acc) return i;
    }
    return freq.size() - 1;
}

inline StarRecord finish_record(double physical_amag, double bv_obs, const std::string& sp,
                                bool giant, double log10_dist, Rng& rng) {
    StarRecord rec;
    const double dist = std::pow(10.0, log10_dist);
    const double plx_mas = 1000.0 / dist;
    rec.vmag = round_to(physical_amag + 5.0 * log10_dist - 5.0, 2);
    rec.plx = round_to(plx_mas, 2);
    rec.e_plx = round_to(0.3 + 0.6 * std::abs(rng.next_normal()), 2);
    rec.bv = round_to(bv_obs, 3);
    rec.sp_type = sp;
    // same convention as the public file: the arcsecond formula applied to
    // the milliarcsecond column value
    rec.amag = round_to(rec.vmag + 5.0 * std::log10(rec.plx) + 5.0, 2);
    rec.target_class = giant ? 1 : 0;
    return rec;
}

inline StarRecord sample_star(const SyntheticCatalogueOptions& opt, Rng& rng) {
    const bool giant = rng.next_unit() < 0.5;

    if (rng.next_unit() < opt.special_fraction) {
        // peculiar spectral strings whose first letter is outside OBAFGKM
        static const std::array<const char*, 6> kSpecial{"sdB", "sdF", "DA", "DZ", "C", "S"};
        const std::string base = kSpecial[rng.next_below(kSpecial.size())];
        const std::string sp = base + std::to_string(rng.next_below(9));
        const double bv = rng.next_range(-0.3, 1.6);
        const double amag = giant ? giant_amag(bv) + rng.next_normal(0.0, opt.giant_sigma)
                                  : main_sequence_amag(bv) + rng.next_normal(0.0, opt.ms_sigma);
        const double log10_dist = giant ? rng.next_range(1.6, 2.9) : rng.next_range(1.0, 2.2);
        return finish_record(amag, bv + rng.next_normal(0.0, opt.bv_sigma), sp, giant, log10_dist,
                             rng);
    }

    std::string lum;
    if (giant) {
        const double v = rng.next_unit();
        if (v < opt.subgiant_fraction) lum = "IV";
        else if (v < opt.subgiant_fraction + 0.10) lum = "II";
        else if (v < opt.subgiant_fraction + 0.15) lum = "Ib";
        else lum = "III";
    } else {
        lum = "V";
    }

    const auto& freq = !giant          ? kDwarfFreq
                       : lum == "IV"   ? kSubgiantFreq
                                       : kGiantFreq;
    std::size_t letter = sample_index(freq, rng);
    const auto& band = kBands[letter];
    // subclasses cluster toward the middle of each band
    const double u = rng.next_unit();
    const double w = opt.subclass_centering;
    const double s = (1.0 - w) * u + w * u * u * (3.0 - 2.0 * u);
    const double bv_true = band.lo + s * (band.hi - band.lo) + (giant ? 0.06 : 0.0);
    const double bv_obs = bv_true + rng.next_normal(0.0, opt.bv_sigma);
    const int digit = static_cast<int>(s * 10.0) % 10;

    double physical_amag;
    if (giant) {
        const double base = giant_amag(bv_true);
        if (lum == "IV") {
            // subgiants fill the gap between the branches
            const double ms = main_sequence_amag(bv_true);
            const double t = rng.next_range(0.15, 0.85);
            physical_amag = ms + t * (base - ms) + rng.next_normal(0.0, 0.3);
        } else if (lum == "II") {
            physical_amag = base - 1.6 + rng.next_normal(0.0, opt.giant_sigma);
        } else if (lum == "Ib") {
            physical_amag = base - 3.2 + rng.next_normal(0.0, opt.giant_sigma);
        } else {
            physical_amag = base + rng.next_normal(0.0, opt.giant_sigma);
        }
    } else {
        physical_amag = main_sequence_amag(bv_true) + rng.next_normal(0.0, opt.ms_sigma);
    }

    // catalogued letters are uncertain: band-edge stars are often classified
    // into the adjacent type, and occasional one-step relabels occur anywhere
    if (s < 0.1 && letter > 0 && rng.next_unit() < opt.edge_flip) {
        --letter;
    } else if (s > 0.9 && letter < 6 && rng.next_unit() < opt.edge_flip) {
        ++letter;
    } else if (rng.next_unit() < opt.letter_flip) {
        if (letter == 0) letter = 1;
        else if (letter == 6) letter = 5;
        else letter = rng.next_unit() < 0.5 ? letter - 1 : letter + 1;
    }
    bool labeled_giant = giant;
    if (rng.next_unit() < opt.target_flip) {
        labeled_giant = !labeled_giant;
        lum.clear();
    }
    const std::string sp =
        std::string(1, kBands[letter].letter) + std::to_string(digit) + lum;

    const double log10_dist = giant ? rng.next_range(1.6, 2.9) : rng.next_range(1.0, 2.2);
    return finish_record(physical_amag, bv_obs, sp, labeled_giant, log10_dist, rng);
}

}  // namespace synth_detail

inline std::vector<StarRecord> generate_synthetic_catalogue(
    const SyntheticCatalogueOptions& opt = {}) {
    Rng rng(opt.seed);
    std::vector<StarRecord> rows;
    rows.reserve(opt.clean_rows + opt.duplicate_rows + opt.missing_rows +
                 opt.nonpositive_plx_rows);
    for (std::size_t i = 0; i < opt.clean_rows; ++i)
        rows.push_back(synth_detail::sample_star(opt, rng));

    // exact duplicates of clean rows
    for (std::size_t i = 0; i < opt.duplicate_rows; ++i)
        rows.push_back(rows[rng.next_below(opt.clean_rows)]);

    // independently sampled rows with exactly one missing field
    for (std::size_t i = 0; i < opt.missing_rows; ++i) {
        StarRecord rec = synth_detail::sample_star(opt, rng);
        switch (i % 5) {
            case 0: rec.plx = kMissing; break;
            case 1: rec.bv = kMissing; break;
            case 2: rec.sp_type.clear(); break;
            case 3: rec.amag = kMissing; break;
            case 4: rec.e_plx = kMissing; break;
        }
        rows.push_back(std::move(rec));
    }

    // rows with zero or negative parallax
    for (std::size_t i = 0; i < opt.nonpositive_plx_rows; ++i) {
        StarRecord rec = synth_detail::sample_star(opt, rng);
        rec.plx = i % 3 == 0 ? 0.0 : -synth_detail::round_to(0.01 + 0.02 * static_cast<double>(i),
                                                             2);
        rec.amag = synth_detail::round_to(rec.vmag + 5.0, 2);
        rows.push_back(std::move(rec));
    }

    rng.shuffle(rows);
    return rows;
}

// Fixed-decimal CSV in the public file's layout.
inline void write_synthetic_catalogue(const std::string& path,
                                      const SyntheticCatalogueOptions& opt = {}) {
    const auto rows = generate_synthetic_catalogue(opt);
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << "Vmag,Plx,e_Plx,B-V,SpType,Amag,TargetClass\n";
    char buf[64];
    auto cell = [&](double v, int decimals) -> std::string {
        if (std::isnan(v)) return {};
        std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
        return buf;
    };
    for (const auto& r : rows) {
        out << cell(r.vmag, 2) << ',' << cell(r.plx, 2) << ',' << cell(r.e_plx, 2) << ','
            << cell(r.bv, 3) << ',' << r.sp_type << ',' << cell(r.amag, 2) << ','
            << (r.target_class < 0 ? std::string() : std::to_string(r.target_class)) << '\n';
    }
    if (!out) throw IoError("write failed: " + path);
}

}  // namespace starsvm
