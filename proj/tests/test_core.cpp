#include <doctest.h>

#include <random>
#include <string>
#include <vector>

#include "steam/analytics.hpp"
#include "steam/packet.hpp"
#include "steam/value.hpp"
#include "steam/window.hpp"

using namespace steam;

namespace {

DataPacket numbered_packet(const std::string& name, double v) {
    DataPacket p;
    p.append("id", Value::number(v));
    p.append(name, Value::number(v));
    return p;
}

}  // namespace

TEST_CASE("value kinds are distinct states") {
    Value m = Value::missing();
    Value zero = Value::number(0.0);
    Value empty = Value::text("");

    CHECK(m.is_missing());
    CHECK_FALSE(zero.is_missing());
    CHECK_FALSE(empty.is_missing());
    CHECK(m != zero);
    CHECK(m != empty);
    CHECK(zero != empty);

    CHECK(Value::number(1.5) == Value::number(1.5));
    CHECK(Value::number(1.5) != Value::number(2.5));
    CHECK(Value::text("a") == Value::text("a"));
    CHECK(Value::missing() == Value::missing());
}

TEST_CASE("non-finite numbers collapse to missing") {
    CHECK(Value::number(std::numeric_limits<double>::quiet_NaN()).is_missing());
    CHECK(Value::number(std::numeric_limits<double>::infinity()).is_missing());
    CHECK(Value::number(-std::numeric_limits<double>::infinity()).is_missing());
    CHECK(Value::number(1e308).is_number());
}

TEST_CASE("timestamps stay text for analytics") {
    Value ts = Value::timestamp("2021-01-01T00:00:07Z");
    CHECK(ts.is_text());
    CHECK_FALSE(ts.is_number());
    CHECK(ts.str() == "2021-01-01T00:00:07Z");
}

TEST_CASE("packet lookup distinguishes absent from missing") {
    DataPacket p;
    p.append("s1", Value::number(1.0));
    p.append("s2", Value::missing());

    CHECK(p.has("s1"));
    CHECK(p.has("s2"));
    CHECK_FALSE(p.has("s3"));

    CHECK(p.find("s2") != nullptr);
    CHECK(p.find("s2")->value.is_missing());
    CHECK(p.find("s3") == nullptr);

    CHECK(p.value_or_missing("s3").is_missing());
    CHECK(p.value_or_missing("s1") == Value::number(1.0));
}

TEST_CASE("packet preserves column order") {
    DataPacket p;
    p.append("id", Value::number(1));
    p.append("timestamp", Value::timestamp("t"));
    p.append("unit", Value::text("C"));
    p.append("value", Value::number(10.2));

    REQUIRE(p.size() == 4);
    CHECK(p.columns()[0].name == "id");
    CHECK(p.columns()[1].name == "timestamp");
    CHECK(p.columns()[2].name == "unit");
    CHECK(p.columns()[3].name == "value");
}

TEST_CASE("window push evicts the oldest entry first") {
    SUBCASE("capacity 2, [A,B] push C -> [B,C]") {
        SlidingWindow w(2);
        w.push(numbered_packet("v", 1));  // A
        w.push(numbered_packet("v", 2));  // B
        w.push(numbered_packet("v", 3));  // C
        REQUIRE(w.size() == 2);
        CHECK(w.at(0).value_or_missing("v") == Value::number(2));
        CHECK(w.at(1).value_or_missing("v") == Value::number(3));
        CHECK(w.newest().value_or_missing("v") == Value::number(3));
    }
    SUBCASE("capacity 20, empty push A -> [A]") {
        SlidingWindow w(20);
        w.push(numbered_packet("v", 1));
        REQUIRE(w.size() == 1);
        CHECK(w.newest().value_or_missing("v") == Value::number(1));
    }
    SUBCASE("capacity 1, [A] push B -> [B]") {
        SlidingWindow w(1);
        w.push(numbered_packet("v", 1));
        w.push(numbered_packet("v", 2));
        REQUIRE(w.size() == 1);
        CHECK(w.newest().value_or_missing("v") == Value::number(2));
    }
}

TEST_CASE("window column slice runs oldest to newest") {
    SlidingWindow w(5);
    for (double v : {1.0, 2.0, 3.0}) {
        DataPacket p;
        p.append("s1", Value::number(v));
        w.push(std::move(p));
    }

    SUBCASE("present in every packet") {
        auto xs = w.column("s1");
        REQUIRE(xs.size() == 3);
        CHECK(xs[0] == Value::number(1.0));
        CHECK(xs[1] == Value::number(2.0));
        CHECK(xs[2] == Value::number(3.0));
    }
    SUBCASE("absent from every packet reads as missing") {
        auto xs = w.column("nope");
        REQUIRE(xs.size() == 3);
        for (const auto& x : xs) CHECK(x.is_missing());
    }
    SUBCASE("mixed presence") {
        SlidingWindow m(3);
        DataPacket a;
        a.append("s1", Value::number(1.0));
        m.push(std::move(a));
        DataPacket b;
        b.append("s1", Value::missing());
        m.push(std::move(b));
        DataPacket c;
        c.append("s1", Value::number(3.0));
        m.push(std::move(c));

        auto xs = m.column("s1");
        REQUIRE(xs.size() == 3);
        CHECK(xs[0] == Value::number(1.0));
        CHECK(xs[1].is_missing());
        CHECK(xs[2] == Value::number(3.0));
    }
}

TEST_CASE("window equals the tail of the push sequence") {
    // Brute-force oracle: after n pushes the window holds the last
    // min(n, capacity) packets in push order.
    std::mt19937 gen(42);
    std::uniform_int_distribution<int> cap_dist(1, 8);
    std::uniform_int_distribution<int> len_dist(0, 30);

    for (int trial = 0; trial < 200; ++trial) {
        std::size_t cap = static_cast<std::size_t>(cap_dist(gen));
        int n = len_dist(gen);
        SlidingWindow w(cap);
        std::vector<double> pushed;
        for (int i = 0; i < n; ++i) {
            double v = static_cast<double>(i);
            pushed.push_back(v);
            DataPacket p;
            p.append("x", Value::number(v));
            w.push(std::move(p));
        }
        std::size_t expect = std::min(pushed.size(), cap);
        REQUIRE(w.size() == expect);
        for (std::size_t i = 0; i < expect; ++i) {
            double want = pushed[pushed.size() - expect + i];
            CHECK(w.at(i).value_or_missing("x") == Value::number(want));
        }
        // column length always equals window length, known column or not
        CHECK(w.column("x").size() == expect);
        CHECK(w.column("y").size() == expect);
    }
}

TEST_CASE("numeric format strings") {
    SUBCASE("fixed point") {
        auto f = parse_numeric_format("{:.2f}");
        REQUIRE(f.has_value());
        CHECK_FALSE(f->space_flag);
        CHECK(f->precision == 2);
        CHECK(f->apply(13.456) == "13.46");
        CHECK(f->apply(13.0) == "13.00");
    }
    SUBCASE("space flag") {
        auto f = parse_numeric_format("{: .2f}");
        REQUIRE(f.has_value());
        CHECK(f->space_flag);
        CHECK(f->apply(10.0) == " 10.00");
        CHECK(f->apply(-10.0) == "-10.00");
    }
    SUBCASE("single digit precision") {
        auto f = parse_numeric_format("{:.1f}");
        REQUIRE(f.has_value());
        CHECK(f->apply(0.25) == "0.2");  // round-to-even, C printf semantics
        CHECK(f->apply(8.35) == "8.3");
    }
    SUBCASE("rejects anything else") {
        CHECK_FALSE(parse_numeric_format("").has_value());
        CHECK_FALSE(parse_numeric_format("%.2f").has_value());
        CHECK_FALSE(parse_numeric_format("{}").has_value());
        CHECK_FALSE(parse_numeric_format("{:d}").has_value());
    }
}
