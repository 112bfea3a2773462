// SPDX-License-Identifier: Apache-2.0
//
// mixadc: mixed-ADC massive MIMO uplink simulation toolkit
#include "catch_amalgamated.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "mixadc/experiments.hpp"

using namespace mixadc;
using Catch::Approx;

namespace
{
const CsvRow *find_row(const std::vector<CsvRow> &rows, const std::string &curve, double x)
{
    for (const auto &r : rows)
        if (r.curve == curve && r.x_value == x)
            return &r;
    return nullptr;
}
} // namespace

TEST_CASE("experiments - Figure identifiers")
{
    CHECK(all_figures().size() == 12);
    for (FigureId id : all_figures())
        CHECK(parse_figure_id(to_string(id)) == id);
    CHECK(parse_figure_id("F9") == FigureId::kF9ZfSnr);
    CHECK(parse_figure_id("f12") == FigureId::kF12MrcComp);
    CHECK(parse_figure_id("4") == FigureId::kF4EstError);
    CHECK(std::string(to_string(FigureId::kF15ZfN)) == "F15_ZF_N");
    CHECK_THROWS_AS(parse_figure_id("F3"), std::invalid_argument);
    CHECK_THROWS_AS(parse_figure_id("banana"), std::invalid_argument);

    const FigureSpec s = FigureSpec::defaults(FigureId::kF8MrcSnr);
    CHECK(s.base.antennas == 100);
    CHECK(s.base.users == 10);
    FigureSpec bad = s;
    bad.snr_db.clear();
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("experiments - Architectures")
{
    const SystemConfig base = SystemConfig::make(100, 20, 10, 400, 10, 0.0);
    CHECK(Architecture::from_name("joint-as").selection == Selection::kGlobal);
    CHECK(Architecture::from_name("one-bit").apply(base).highres == 0);
    const Architecture u = Architecture::from_name("uniform-3bit");
    CHECK(u.uniform_bits == 3);
    CHECK_THROWS_AS(Architecture::from_name("quantum"), std::invalid_argument);
    CHECK_THROWS_AS(Architecture::from_name("uniform-0bit"), std::invalid_argument);
}

TEST_CASE("experiments - CSV schema and round trip")
{
    std::vector<CsvRow> rows{{"F4_EST_ERROR", "One-bit, eta=K", "snr_db", -5.0, 0.125, std::nullopt},
                             {"F9_ZF_SNR", "Joint \"AS\"", "snr_db", 10.0, 66.5712345678901, 0.0371}};
    const std::string text = to_csv(rows);
    std::istringstream in(text);
    std::string header;
    std::getline(in, header);
    CHECK(header == "figure,curve,x_name,x_value,y_value,stderr");
    std::string first;
    std::getline(in, first);
    CHECK(first.back() == ',');
    CHECK(first.find("\"One-bit, eta=K\"") != std::string::npos);

    const std::vector<CsvRow> back = parse_csv(text);
    REQUIRE(back.size() == 2);
    for (std::size_t i = 0; i < 2; ++i)
    {
        CHECK(back[i].figure == rows[i].figure);
        CHECK(back[i].curve == rows[i].curve);
        CHECK(back[i].x_name == rows[i].x_name);
        CHECK(back[i].x_value == rows[i].x_value);
        CHECK(back[i].y_value == rows[i].y_value);
        CHECK(back[i].std_error == rows[i].std_error);
    }
    CHECK_THROWS_AS(parse_csv("a,b\n1,2\n"), std::invalid_argument);
}

TEST_CASE("experiments - Power split")
{
    const PowerSplit eq = split_from_fraction(10.0 / 400.0, 2.5, 400, 10);
    CHECK(eq.train_power == Approx(2.5).epsilon(1e-14));
    CHECK(eq.data_power == Approx(2.5).epsilon(1e-14));
    const PowerSplit s = split_from_fraction(0.3, 2.0, 400, 50);
    CHECK(50 * s.train_power + 350 * s.data_power == Approx(2.0 * 400).epsilon(1e-14));
    CHECK_THROWS_AS(split_from_fraction(0.0, 1.0, 400, 10), std::invalid_argument);
    CHECK_THROWS_AS(split_from_fraction(0.5, 1.0, 400, 400), std::invalid_argument);

    // grid-search oracle
    const SystemConfig c = SystemConfig::make(100, 20, 10, 400, 10, 0.0);
    const Architecture arch = Architecture::from_name("joint-fixed");
    const PowerSplit opt = optimize_power_split(c, arch, Detector::kMrc);
    CHECK(opt.eta_eff == 50);
    double grid = 0.0;
    for (int i = 0; i < 10000; ++i)
    {
        const PowerSplit g = split_from_fraction((i + 0.5) / 10000.0, c.power, 400, 50);
        grid = std::max(grid, closed_form_sum_se(c.with_powers(g.train_power, g.data_power), arch, Detector::kMrc));
    }
    CHECK(opt.sum_se == Approx(grid).epsilon(1e-4));
    CHECK(opt.sum_se >= grid * (1.0 - 1e-6));

    // optimized split dominates the equal split
    for (const char *name : {"joint-fixed", "joint-as", "fullres-fixed", "one-bit", "non-rr", "uniform-2bit"})
        for (Detector det : {Detector::kMrc, Detector::kZf})
            for (double snr : {-10.0, 0.0, 10.0})
            {
                const SystemConfig cs = c.with_snr_db(snr);
                const Architecture a = Architecture::from_name(name);
                const PowerSplit o = optimize_power_split(cs, a, det);
                INFO(name << " " << snr);
                CHECK(o.sum_se >= closed_form_sum_se(a.apply(cs), a, det) * (1.0 - 1e-9));
                CHECK(o.train_power * o.eta_eff + o.data_power * (400 - o.eta_eff) == Approx(400 * cs.power).epsilon(1e-12));
            }
}

TEST_CASE("experiments - Closed-form figures")
{
    FigureSpec f4 = FigureSpec::defaults(FigureId::kF4EstError);
    f4.snr_db = {60.0};
    f4.trials = 200;
    const FigureResult r4 = run_figure(f4);
    const CsvRow *onebit = find_row(r4.rows, "One-bit, eta=K", 60.0);
    REQUIRE(onebit != nullptr);
    CHECK(onebit->y_value == Approx(1.0 - 2.0 / std::numbers::pi).margin(1e-3));
    CHECK_FALSE(onebit->std_error.has_value());
    bool simulated = false;
    for (const auto &row : r4.rows)
        if (row.curve.find("simulation") != std::string::npos)
        {
            simulated = true;
            CHECK(row.std_error.has_value());
        }
    CHECK(simulated);

    FigureSpec f5 = FigureSpec::defaults(FigureId::kF5Weights);
    f5.snr_db = {80.0};
    const FigureResult r5 = run_figure(f5);
    for (const auto &row : r5.rows)
    {
        if (row.curve.rfind("w_inf", 0) == 0)
            CHECK(row.y_value > 0.999);
        if (row.curve.rfind("w_1", 0) == 0)
            CHECK(row.y_value < 1e-3);
    }

    FigureSpec f8 = FigureSpec::defaults(FigureId::kF8MrcSnr);
    f8.snr_db = {-10.0, 10.0};
    const FigureResult a = run_figure(f8);
    const FigureResult b = run_figure(f8);
    CHECK(to_csv(a.rows) == to_csv(b.rows));
    CHECK(a.meta_json == b.meta_json);
    for (const auto &row : a.rows)
        CHECK(row.y_value >= 0.0);

    const auto meta = nlohmann::json::parse(a.meta_json);
    CHECK(meta.at("figure") == "F8_MRC_SNR");
    CHECK(meta.at("base_config").at("M") == 100);
    CHECK(meta.contains("seed"));
    CHECK(meta.at("curves").size() > 0);

    const auto dir = std::filesystem::temp_directory_path() / "mixadc_test_experiments";
    std::filesystem::remove_all(dir);
    const auto csv = write_figure(a, FigureId::kF8MrcSnr, dir);
    CHECK(csv.filename() == "F8_MRC_SNR.csv");
    CHECK(std::filesystem::exists(dir / "F8_MRC_SNR.meta.json"));
    std::ifstream in(csv);
    std::stringstream buf;
    buf << in.rdbuf();
    CHECK(parse_csv(buf.str()).size() == a.rows.size());
    std::filesystem::remove_all(dir);
}

TEST_CASE("experiments - Monte Carlo figure rows carry errors")
{
    FigureSpec f9 = FigureSpec::defaults(FigureId::kF9ZfSnr);
    f9.base = SystemConfig::make(20, 4, 2, 400, 2, 0.0);
    f9.snr_db = {0.0};
    f9.coherence = {400};
    f9.highres = {4};
    f9.trials = 200;
    const FigureResult r = run_figure(f9);
    REQUIRE_FALSE(r.rows.empty());
    for (const auto &row : r.rows)
    {
        CHECK(row.std_error.has_value());
        CHECK(*row.std_error >= 0.0);
    }
}
