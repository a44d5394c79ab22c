#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "starsvm/metrics.hpp"
#include "starsvm/rng.hpp"

using namespace starsvm;

namespace {
bool near(double a, double b, double tol = 1e-12) { return std::abs(a - b) <= tol; }
}

TEST_CASE("confusion counts") {
    SUBCASE("perfect prediction is diagonal") {
        const std::vector<std::string> t{"A", "B", "A", "B"};
        const auto cm = confusion(t, t, {"A", "B"});
        CHECK(cm.count(0, 0) == 2);
        CHECK(cm.count(1, 1) == 2);
        CHECK(cm.count(0, 1) == 0);
        CHECK(cm.count(1, 0) == 0);
        CHECK(cm.total() == 4);
    }

    SUBCASE("worked 3-sample example") {
        const std::vector<std::string> t{"A", "A", "B"};
        const std::vector<std::string> p{"A", "B", "B"};
        const auto cm = confusion(t, p, {"A", "B"});
        CHECK(cm.count(0, 0) == 1);
        CHECK(cm.count(0, 1) == 1);
        CHECK(cm.count(1, 0) == 0);
        CHECK(cm.count(1, 1) == 1);
        CHECK(cm.row_sum(0) == 2);
        CHECK(cm.row_sum(1) == 1);
    }

    SUBCASE("labels outside the class list are rejected") {
        const std::vector<std::string> t{"A", "C"};
        const std::vector<std::string> p{"A", "A"};
        CHECK_THROWS_AS(confusion(t, p, {"A", "B"}), std::invalid_argument);
    }
}

TEST_CASE("percentage view") {
    SUBCASE("diagonal matrix maps to 100s") {
        const std::vector<std::string> t{"A", "B", "B"};
        const auto pm = to_percent(confusion(t, t, {"A", "B"}));
        CHECK(near(pm.at(0, 0), 100.0));
        CHECK(near(pm.at(1, 1), 100.0));
        CHECK_FALSE(pm.empty_rows[0]);
    }

    SUBCASE("worked example") {
        const std::vector<std::string> t{"A", "A", "B"};
        const std::vector<std::string> p{"A", "B", "B"};
        const auto pm = to_percent(confusion(t, p, {"A", "B"}));
        CHECK(near(pm.at(0, 0), 50.0));
        CHECK(near(pm.at(0, 1), 50.0));
        CHECK(near(pm.at(1, 0), 0.0));
        CHECK(near(pm.at(1, 1), 100.0));
    }

    SUBCASE("empty class row is zeroed and flagged") {
        const std::vector<std::string> t{"A", "A"};
        const std::vector<std::string> p{"A", "B"};
        const auto pm = to_percent(confusion(t, p, {"A", "B"}));
        CHECK(pm.empty_rows[1]);
        CHECK(near(pm.at(1, 0), 0.0));
        CHECK(near(pm.at(1, 1), 0.0));
    }

    SUBCASE("non-empty rows sum to 100") {
        Rng rng(307);
        std::vector<std::string> t(200);
        std::vector<std::string> p(200);
        const char* names[3] = {"A", "B", "C"};
        for (std::size_t i = 0; i < 200; ++i) {
            t[i] = names[rng.next_below(3)];
            p[i] = names[rng.next_below(3)];
        }
        const auto pm = to_percent(confusion(t, p, {"A", "B", "C"}));
        for (std::size_t i = 0; i < 3; ++i) {
            double row = 0.0;
            for (std::size_t j = 0; j < 3; ++j) row += pm.at(i, j);
            CHECK(near(row, 100.0, 1e-9));
        }
    }
}

TEST_CASE("binary metrics") {
    SUBCASE("perfect classifier scores 1.0 everywhere") {
        ConfusionMatrix cm({"dwarf", "giant"});
        cm.at(1, 1) = 50;  // TP
        cm.at(0, 0) = 50;  // TN
        const auto m = binary_metrics(cm, "giant");
        CHECK(near(m.accuracy, 1.0));
        CHECK(near(m.f1, 1.0));
        CHECK(near(m.specificity, 1.0));
        CHECK(near(m.sensitivity, 1.0));
    }

    SUBCASE("hand-checked mixed example") {
        // TP=40, FN=10, TN=45, FP=5
        ConfusionMatrix cm({"dwarf", "giant"});
        cm.at(1, 1) = 40;
        cm.at(1, 0) = 10;
        cm.at(0, 0) = 45;
        cm.at(0, 1) = 5;
        const auto m = binary_metrics(cm, "giant");
        CHECK(near(m.accuracy, 0.85));
        CHECK(near(m.sensitivity, 0.8));
        CHECK(near(m.specificity, 0.9));
        CHECK(near(m.f1, 80.0 / 95.0));
    }

    SUBCASE("no positive samples flags sensitivity undefined") {
        ConfusionMatrix cm({"dwarf", "giant"});
        cm.at(0, 0) = 10;
        const auto m = binary_metrics(cm, "giant");
        CHECK_FALSE(m.sensitivity_defined);
        CHECK(std::isnan(m.sensitivity));
        CHECK(m.specificity_defined);
        const auto j = binary_metrics_to_json(m);
        CHECK(j.at("sensitivity").is_null());
    }

    SUBCASE("needs a 2x2 matrix") {
        ConfusionMatrix cm({"A", "B", "C"});
        CHECK_THROWS_AS(binary_metrics(cm, "A"), std::invalid_argument);
    }
}

TEST_CASE("accuracy equals trace over total") {
    Rng rng(311);
    std::vector<std::string> t(150);
    std::vector<std::string> p(150);
    const char* names[4] = {"A", "F", "K", "M"};
    for (std::size_t i = 0; i < 150; ++i) {
        t[i] = names[rng.next_below(4)];
        p[i] = names[rng.next_below(4)];
    }
    const auto cm = confusion(t, p, {"A", "F", "K", "M"});
    std::size_t diag = 0;
    for (std::size_t i = 0; i < 4; ++i) diag += cm.count(i, i);
    CHECK(accuracy(cm) == static_cast<double>(diag) / 150.0);
}

TEST_CASE("macro F1") {
    SUBCASE("perfect 3-class gives 1.0") {
        const std::vector<std::string> t{"A", "B", "C", "A"};
        const auto r = macro_f1(confusion(t, t, {"A", "B", "C"}));
        CHECK(r.defined);
        CHECK(near(r.value, 1.0));
        CHECK(r.excluded_classes.empty());
    }

    SUBCASE("an all-wrong class contributes F1 = 0") {
        const std::vector<std::string> t{"A", "A", "B", "B"};
        const std::vector<std::string> p{"B", "B", "B", "B"};
        const auto r = macro_f1(confusion(t, p, {"A", "B"}));
        CHECK(r.defined);
        // class A: F1 = 0; class B: TP=2, FP=2, FN=0 -> F1 = 4/6
        CHECK(near(r.value, 0.5 * (0.0 + 4.0 / 6.0)));
    }

    SUBCASE("class absent from truth and prediction is excluded") {
        const std::vector<std::string> t{"A", "B"};
        const std::vector<std::string> p{"A", "B"};
        const auto r = macro_f1(confusion(t, p, {"A", "B", "C"}));
        CHECK(r.defined);
        CHECK(r.excluded_classes == std::vector<std::string>{"C"});
        CHECK(near(r.value, 1.0));
    }

    SUBCASE("matches a per-class recomputation oracle") {
        Rng rng(313);
        std::vector<std::string> t(120);
        std::vector<std::string> p(120);
        const char* names[3] = {"A", "F", "K"};
        for (std::size_t i = 0; i < 120; ++i) {
            t[i] = names[rng.next_below(3)];
            p[i] = names[rng.next_below(3)];
        }
        const auto cm = confusion(t, p, {"A", "F", "K"});
        const auto r = macro_f1(cm);

        double sum = 0.0;
        std::size_t cnt = 0;
        for (const auto& cls : cm.classes()) {
            std::size_t tp = 0, fp = 0, fn = 0;
            for (std::size_t i = 0; i < t.size(); ++i) {
                const bool is_true = t[i] == cls;
                const bool is_pred = p[i] == cls;
                if (is_true && is_pred) ++tp;
                if (!is_true && is_pred) ++fp;
                if (is_true && !is_pred) ++fn;
            }
            if (2 * tp + fp + fn == 0) continue;
            sum += 2.0 * static_cast<double>(tp) / static_cast<double>(2 * tp + fp + fn);
            ++cnt;
        }
        CHECK(near(r.value, sum / static_cast<double>(cnt)));
    }
}

TEST_CASE("class permutation leaves accuracy and macro F1 unchanged") {
    Rng rng(317);
    std::vector<std::string> t(100);
    std::vector<std::string> p(100);
    const char* names[3] = {"A", "F", "K"};
    for (std::size_t i = 0; i < 100; ++i) {
        t[i] = names[rng.next_below(3)];
        p[i] = names[rng.next_below(3)];
    }
    const auto cm1 = confusion(t, p, {"A", "F", "K"});
    const auto cm2 = confusion(t, p, {"K", "A", "F"});
    CHECK(accuracy(cm1) == accuracy(cm2));
    CHECK(near(macro_f1(cm1).value, macro_f1(cm2).value));

    // rows/columns permute consistently
    CHECK(cm1.count(cm1.class_index("A"), cm1.class_index("F")) ==
          cm2.count(cm2.class_index("A"), cm2.class_index("F")));
}

TEST_CASE("confusion csv emission") {
    const std::vector<std::string> t{"A", "A", "B"};
    const std::vector<std::string> p{"A", "B", "B"};
    const auto cm = confusion(t, p, {"A", "B"});

    const auto dir = std::filesystem::temp_directory_path() / "starsvm_metrics_csv";
    std::filesystem::create_directories(dir);
    const auto counts_path = (dir / "counts.csv").string();
    const auto pct_path = (dir / "pct.csv").string();
    write_confusion_counts_csv(counts_path, cm);
    write_confusion_percent_csv(pct_path, cm);

    std::ifstream in(counts_path);
    std::string line;
    std::getline(in, line);
    CHECK(line == "true\\pred,A,B");
    std::getline(in, line);
    CHECK(line == "A,1,1");
    std::getline(in, line);
    CHECK(line == "B,0,1");
    std::filesystem::remove_all(dir);
}
