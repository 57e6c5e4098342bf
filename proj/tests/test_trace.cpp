#include "gptemper/errors.hpp"
#include "gptemper/trace.hpp"

#include "doctest.h"

#include <sstream>

using namespace gptemper;

TEST_CASE("trace CSV round trip with and without ess")
{
    Trace t;
    t.rmse_columns = 2;
    t.rows.push_back({0.125, 0.001, 59.5, -12.25, 60, {0.5, 0.25}});
    t.rows.push_back({0.5, 50, std::nullopt, -10.0, 651, {0.1 / 3.0, 1e-17}});
    std::ostringstream out;
    write_trace_csv(t, out);
    const std::string text = out.str();
    CHECK(text.rfind("wall_time_s,step_or_gamma,ess,log_target_mean,factorizations,rmse_1,rmse_2\n", 0) == 0);

    std::istringstream in(text);
    const Trace back = read_trace_csv(in);
    REQUIRE(back.rows.size() == 2);
    CHECK(back.rmse_columns == 2);
    CHECK(back.rows[0].ess.value() == 59.5);
    CHECK_FALSE(back.rows[1].ess.has_value());
    CHECK(back.rows[1].rmse[0] == 0.1 / 3.0);
    CHECK(back.rows[1].factorizations == 651);
}

TEST_CASE("trace without RMSE has only the fixed columns")
{
    Trace t;
    t.rows.push_back({1.0, 1.0, 3.0, -1.0, 7, {}});
    std::ostringstream out;
    write_trace_csv(t, out);
    CHECK(out.str().rfind("wall_time_s,step_or_gamma,ess,log_target_mean,factorizations\n", 0) == 0);
}

TEST_CASE("malformed traces are rejected")
{
    for (const char* text : {"", "time,step\n1,2\n", "wall_time_s,step_or_gamma,ess,log_target_mean,factorizations\n1,2,3\n",
                             "wall_time_s,step_or_gamma,ess,log_target_mean,factorizations\n1,2,3,4,x\n",
                             "wall_time_s,step_or_gamma,ess,log_target_mean,factorizations\n1,2,3,4,1.5\n"}) {
        std::istringstream in(text);
        CHECK_THROWS_AS(read_trace_csv(in), SchemaError);
    }
}
