#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include <spde_lab/report.hpp>

using namespace spde_lab;

TEST(Compare, EqualValuesGiveZeroScore) {
    const auto row = compare("x", 1.0, 2.0, Estimate{2.0, 0.1});
    EXPECT_EQ(row.z, 0.0);
    EXPECT_TRUE(row.pass);
}

TEST(Compare, ThreeSigmaThreshold) {
    EXPECT_TRUE(compare("x", 0.0, 0.0, Estimate{0.3, 0.1}).pass);
    EXPECT_FALSE(compare("x", 0.0, 0.0, Estimate{0.31, 0.1}).pass);
    EXPECT_FALSE(compare("x", 0.0, 0.0, Estimate{-0.31, 0.1}).pass);
    EXPECT_NEAR(compare("x", 0.0, 1.0, Estimate{1.2, 0.1}).z, 2.0, 1e-12);
}

TEST(Compare, UpperBoundRelation) {
    EXPECT_TRUE(compare("b", 0.0, 1.0, Estimate{0.2, 0.01}, Relation::at_most).pass);
    EXPECT_FALSE(compare("b", 0.0, 1.0, Estimate{1.05, 0.01}, Relation::at_most).pass);
}

TEST(Compare, DeterministicAgreement) {
    const auto row = compare("d", 0.0, 1.5, Estimate{1.5, 0.0});
    EXPECT_TRUE(row.pass);
    EXPECT_EQ(row.z, 0.0);
}

TEST(Compare, DeterministicMismatchThrows) {
    EXPECT_THROW(compare("d", 0.0, 1.5, Estimate{1.6, 0.0}), deterministic_mismatch);
    const auto row = compare_or_fail("d", 0.0, 1.5, Estimate{1.6, 0.0});
    EXPECT_FALSE(row.pass);
    EXPECT_TRUE(std::isinf(row.z));
}

TEST(Compare, NeedsTwoSamples) {
    EnsembleStats s;
    s.add(1.0);
    EXPECT_THROW(compare("s", 0.0, 1.0, s), std::invalid_argument);
    s.add(3.0);
    EXPECT_NO_THROW(compare("s", 0.0, 2.0, s));
}

TEST(Report, CsvLayoutAndTotals) {
    ClosedFormReport r;
    r.add(compare("a", 0.5, 1.0, Estimate{1.0, 0.5}));
    r.add(compare("b", 1.0, 0.0, Estimate{1.0, 0.1}));
    EXPECT_EQ(r.passed(), 1u);
    EXPECT_EQ(r.failed(), 1u);
    EXPECT_FALSE(r.all_pass());
    std::ostringstream os;
    r.write_csv(os);
    EXPECT_EQ(os.str(),
              "label,t,closed_form,mc_mean,mc_stderr,z,pass\n"
              "a,0.5,1,1,0.5,0,true\n"
              "b,1,0,1,0.1,10,false\n");
}

TEST(Report, RealsRoundTrip) {
    for (double v : {0.1, 1.0 / 3.0, 6.02214076e23, -2.5e-300}) {
        EXPECT_EQ(std::stod(format_real(v)), v);
    }
}

TEST(Series, CsvAndWidthCheck) {
    SeriesTable t({"t", "y"});
    t.add_row({0.0, 1.0});
    t.add_row({0.5, 0.25});
    EXPECT_THROW(t.add_row({1.0}), std::invalid_argument);
    std::ostringstream os;
    t.write_csv(os);
    EXPECT_EQ(os.str(), "t,y\n0,1\n0.5,0.25\n");
}
