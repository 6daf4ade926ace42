#include "doctest.h"
#include "support.hpp"

#include <filesystem>
#include <fstream>
#include <numbers>

using namespace pipeflow;
using namespace pipeflow::testing;

namespace {

double eval(const std::string& text, double x = 0.0, double y = 0.0) { return Expression::parse(text)(x, y); }

ConfigError config_error(const std::string& text)
{
    try {
        CaseConfig::parse(text);
    } catch (const ConfigError& e) {
        return e;
    }
    FAIL("expected a ConfigError for:\n" << text);
    return ConfigError(-1, -1, "");
}

ConfigError expression_error(const std::string& text, int line = 0, int column = 1)
{
    try {
        Expression::parse(text, line, column);
    } catch (const ConfigError& e) {
        return e;
    }
    FAIL("expected a ConfigError for " << text);
    return ConfigError(-1, -1, "");
}

const char* minimal = "[domain]\nshape = straight\n[physics]\ninflow = POISEUILLE(1)\n";

}  // namespace

TEST_CASE("expression evaluation")
{
    CHECK(eval("1 + 2 * 3") == 7.0);
    CHECK(eval("(1 + 2) * 3") == 9.0);
    CHECK(eval("2 ^ 3 ^ 2") == 512.0);
    CHECK(eval("-2 ^ 2") == -4.0);
    CHECK(eval("2 * -3") == -6.0);
    CHECK(eval("8 / 4 / 2") == 1.0);
    CHECK(eval("10 - 4 - 3") == 3.0);
    CHECK(eval("1.5e2") == 150.0);
    CHECK(eval(".5") == 0.5);
    CHECK(eval("pi") == std::numbers::pi);
    CHECK(eval("e") == std::numbers::e);
    CHECK(eval("x * y + x", 2.0, 3.0) == 8.0);
    CHECK(eval("sqrt(abs(x))", -9.0) == 3.0);
    CHECK(eval("log(exp(y))", 0.0, 0.7) == doctest::Approx(0.7).epsilon(1e-15));
    CHECK(eval("sin(x)^2 + cos(x)^2", 1.234) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(eval("tan(x)", 0.3) == std::tan(0.3));
    CHECK(eval("  x  ", 4.0) == 4.0);

    CHECK_FALSE(Expression::parse("2 * pi").depends_on_position());
    CHECK(Expression::parse("1 + y").depends_on_position());
    CHECK(Expression::parse("x+1") == Expression::parse("x + 1"));
    CHECK_FALSE(Expression::parse("x+1") == Expression::parse("1+x"));
    CHECK(Expression::constant(2.5)(Vec2(7.0, 8.0)) == 2.5);
    CHECK(Expression()(1.0, 1.0) == 0.0);
}

TEST_CASE("expression derivatives")
{
    const auto f = Expression::parse("sin(x*y) + x^3 - exp(y)/2");
    const double x = 0.4, y = -0.3;
    const auto dx = Dual2<double>::variable(x, 0);
    const auto dy = Dual2<double>::variable(y, 1);
    const auto d = f(dx, dy);
    CHECK(d.v == doctest::Approx(std::sin(x * y) + x * x * x - std::exp(y) / 2));
    CHECK(d.g[0] == doctest::Approx(y * std::cos(x * y) + 3 * x * x).epsilon(1e-14));
    CHECK(d.g[1] == doctest::Approx(x * std::cos(x * y) - std::exp(y) / 2).epsilon(1e-14));
    CHECK(d.h(0, 0) == doctest::Approx(-y * y * std::sin(x * y) + 6 * x).epsilon(1e-14));
    CHECK(d.h(0, 1) == doctest::Approx(std::cos(x * y) - x * y * std::sin(x * y)).epsilon(1e-14));
    CHECK(d.h(1, 0) == d.h(0, 1));
    CHECK(d.h(1, 1) == doctest::Approx(-x * x * std::sin(x * y) - std::exp(y) / 2).epsilon(1e-14));
}

TEST_CASE("expression errors")
{
    CHECK(expression_error("").column() == 1);
    CHECK(expression_error("1 +").column() == 4);
    CHECK(expression_error("(1 + 2").column() >= 1);
    CHECK(expression_error("1 2").column() == 3);
    CHECK(expression_error("z").column() == 1);
    CHECK(expression_error("sinh(x)").column() == 1);
    CHECK(expression_error("sin x").column() >= 1);
    CHECK(expression_error("x $ y").column() == 3);
    // Offsets are added to the reported position.
    const auto e = expression_error("x + * 2", 7, 11);
    CHECK(e.line() == 7);
    CHECK(e.column() == 15);
}

TEST_CASE("INI parsing")
{
    const auto doc = IniDocument::parse("# c\n[a]\nk = v  ; tail\n\n  [b]\nx=1\n");
    REQUIRE(doc.sections.size() == 2);
    CHECK(doc.sections[0].name == "a");
    CHECK(doc.sections[0].entries[0].key == "k");
    CHECK(doc.sections[0].entries[0].value == "v");
    CHECK(doc.sections[0].entries[0].line == 3);
    CHECK(doc.sections[0].entries[0].value_column == 5);
    CHECK(doc.sections[1].line == 5);
    CHECK(doc.sections[1].entries[0].value == "1");

    auto line_of = [](const std::string& t) {
        try {
            IniDocument::parse(t);
        } catch (const ConfigError& e) {
            return e.line();
        }
        return -1;
    };
    CHECK(line_of("k = v\n") == 1);
    CHECK(line_of("[a]\n[a]\n") == 2);
    CHECK(line_of("[a]\nk = 1\nk = 2\n") == 3);
    CHECK(line_of("[a\n") == 1);
    CHECK(line_of("[a]\njunk\n") == 2);
    CHECK(line_of("[a]\nk =\n") == 2);
    CHECK(line_of("[]\n") == 1);
}

TEST_CASE("case parsing")
{
    const auto c = CaseConfig::parse(minimal);
    CHECK(c.domain.shape == DomainShape::Straight);
    CHECK(c.physics.inflow == InflowKind::Poiseuille);
    CHECK(c.physics.inflow_flux == 1.0);
    CHECK(c.solver.outlet == OutletCondition::Ddn);
    CHECK(c.solver.convection == ConvectionForm::Skew);

    CHECK(config_error("[nope]\n").line() == 1);
    CHECK(config_error("[domain]\nwidth = 1\n").line() == 2);
    CHECK(config_error("[domain]\nwidth = 1\n").column() == 1);
    CHECK(config_error("[mesh]\ntarget_h = -1\n").column() == 12);
    CHECK(config_error("[mesh]\ntarget_h = abc\n").line() == 2);
    CHECK(config_error("[mesh]\nrefinements = 1.5\n").line() == 2);
    CHECK(config_error("[solver]\nlinearization = SECANT\n").line() == 2);
    CHECK(config_error("[solver]\ncontinuation = maybe\n").line() == 2);
    CHECK(config_error("[physics]\ninflow = POISEUILLE(-1)\n").line() == 2);
    CHECK(config_error("[physics]\ninflow = sideways\n").line() == 2);
    CHECK(config_error("[physics]\nforce_x = 1 +\n").line() == 2);
    CHECK(config_error("[physics]\nforce_x = 1 +\n").column() == 14);
    CHECK(config_error("[physics]\nforce = 3\n").line() == 2);
    CHECK(config_error("[solver]\nrelative_tolerance = 0\n").line() >= 1);

    SUBCASE("auto needs an exact section")
    {
        const auto e = config_error("[physics]\nforce = auto\n");
        CHECK(e.line() == 2);
        CHECK(config_error("[physics]\ninflow = auto\n").line() == 2);
        CHECK(config_error("[physics]\ntraction = auto\n").line() == 2);
        CHECK_NOTHROW(CaseConfig::parse("[physics]\nforce = auto\n[exact]\nu_x = y\nu_y = 0\np = 0\n"));
    }

    CHECK_THROWS_AS(read_case_file("/nonexistent/case.ini"), ConfigError);
}

TEST_CASE("serialization round trip")
{
    std::vector<std::string> names;
    for (const auto& entry : std::filesystem::directory_iterator(std::string(PIPEFLOW_SOURCE_DIR) + "/cases"))
        if (entry.path().extension() == ".ini") names.push_back(entry.path().stem().string());
    REQUIRE(names.size() >= 6);
    for (const auto& n : names) {
        CAPTURE(n);
        std::string raw;
        const auto c = read_case_file(case_path(n), &raw);
        CHECK_FALSE(raw.empty());
        const std::string text = c.serialize();
        const auto back = CaseConfig::parse(text);
        CHECK(back == c);
        CHECK(back.serialize() == text);
    }
    CaseConfig d;
    CHECK(CaseConfig::parse(d.serialize()) == d);
}

TEST_CASE("case construction")
{
    SUBCASE("straight Poiseuille")
    {
        const auto c = load_case("poiseuille");
        CHECK(c.setup.spec.validated);
        CHECK(c.setup.warnings.empty());
        const Vec2 mid = c.setup.spec.inlet_corner_lower() * 0.5 + c.setup.spec.inlet_corner_upper() * 0.5;
        CHECK(c.setup.data.g(mid).x() > 0.0);
        CHECK(c.setup.data.f(mid).norm() == 0.0);
        REQUIRE(c.setup.exact.has_value());
        CHECK(c.setup.exact->pressure({1.0, 0.3}) == 0.0);
    }
    SUBCASE("sections in degrees")
    {
        auto cfg = CaseConfig::parse(
            "[domain]\nshape = sections\ninlet_angle = 90\ninlet_origin_x = 0\noutlet_origin_x = 0\n"
            "outlet_origin_y = 2\noutlet_angle = 90\n");
        const DomainSpec spec = case_domain(cfg);
        CHECK(spec.inlet_corner_lower().x() == doctest::Approx(0.5));
        CHECK(std::abs(spec.inlet_corner_lower().y()) < 1e-15);
        CHECK(spec.outlet_normal.y() == doctest::Approx(1.0));
    }
    SUBCASE("bad geometry is a geometry error")
    {
        auto cfg = CaseConfig::parse("[domain]\nshape = sections\noutlet_origin_x = -3\n");
        CHECK_THROWS_AS(build_case(cfg), GeometryError);
    }
    SUBCASE("mesh options")
    {
        const auto c = load_case("sbend");
        const auto o = case_mesh_options(c.config, 1);
        CHECK(o.target_h == 0.2);
        CHECK(o.refinement == 1);
        CHECK(case_mesh_options(c.config).refinement == 0);
        // One refinement doubles rows and columns.
        CHECK(generate_mesh(c.setup.spec, o).triangles.size() ==
              4 * generate_mesh(c.setup.spec, case_mesh_options(c.config)).triangles.size());
    }
}

TEST_CASE("derived data from the exact solution")
{
    const auto c = load_case("manufactured");
    REQUIRE(c.setup.exact.has_value());
    const double eta = c.setup.data.eta;
    const double pi = std::numbers::pi;
    auto u = [pi](double x, double y) {
        return Vec2(1.5 - 6 * y * y - 0.1 * pi * std::sin(2 * pi * y) * std::sin(pi * x),
                    -0.1 * pi * std::pow(std::cos(pi * y), 2) * std::cos(pi * x));
    };
    auto p = [pi](double x, double y) { return std::sin(pi * x) * std::cos(pi * y) + x; };

    // Second-order differences of the hand-written fields.
    const double h = 1e-4;
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> ux(0.05, 0.95), uy(-0.45, 0.45);
    for (int k = 0; k < 50; ++k) {
        const double x = ux(rng), y = uy(rng);
        const Vec2 u0 = u(x, y);
        const Vec2 dudx = (u(x + h, y) - u(x - h, y)) / (2 * h);
        const Vec2 dudy = (u(x, y + h) - u(x, y - h)) / (2 * h);
        const Vec2 lap = (u(x + h, y) + u(x - h, y) + u(x, y + h) + u(x, y - h) - 4 * u0) / (h * h);
        const Vec2 gradp((p(x + h, y) - p(x - h, y)) / (2 * h), (p(x, y + h) - p(x, y - h)) / (2 * h));
        const Vec2 expected = -eta * lap + u0.x() * dudx + u0.y() * dudy + gradp;
        CHECK((c.setup.data.f({x, y}) - expected).norm() <= 1e-5 * (1 + expected.norm()));
        CHECK(std::abs(dudx.x() + dudy.y()) < 1e-7);
        CHECK((c.setup.exact->velocity({x, y}) - u0).norm() < 1e-14);
        CHECK(std::abs(c.setup.exact->pressure({x, y}) - p(x, y)) < 1e-14);
        const Mat2 g = c.setup.exact->velocity_gradient({x, y});
        CHECK(std::abs(g(0, 0) - dudx.x()) < 1e-6);
        CHECK(std::abs(g(0, 1) - dudy.x()) < 1e-6);
    }
    // Outlet x = 1: traction eta du_x/dx - p.
    for (double y : {-0.4, 0.0, 0.3}) {
        const double dudx = (u(1 + h, y).x() - u(1 - h, y).x()) / (2 * h);
        CHECK(std::abs(c.setup.data.sigma({1.0, y}) - (eta * dudx - p(1.0, y))) < 1e-7);
    }
    // Inlet: the exact velocity itself.
    for (double y : {-0.5, -0.2, 0.25}) CHECK((c.setup.data.g({0.0, y}) - u(0.0, y)).norm() < 1e-14);
}
