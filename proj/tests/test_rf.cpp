#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "jamloc/rf.hpp"
#include "jamloc/rng.hpp"

using namespace jamloc;
using namespace jamloc::rf;

TEST_CASE("path loss at the reference distance is the reference loss") {
  PropagationParams p;
  p.pl0_db = 40.0;
  p.gamma = 3.0;
  CHECK(path_loss_ldpl(1.0, p, 0.0) == doctest::Approx(40.0).epsilon(1e-12));
}

TEST_CASE("path loss grows with the log-distance slope") {
  PropagationParams p;
  p.pl0_db = 40.0;
  p.gamma = 3.0;
  CHECK(path_loss_ldpl(100.0, p, 0.0) == doctest::Approx(100.0).epsilon(1e-12));

  p.gamma = 3.5;
  CHECK(path_loss_ldpl(10.0, p, 2.0) == doctest::Approx(77.0).epsilon(1e-12));
}

TEST_CASE("non-positive distance is a domain error") {
  PropagationParams p;
  CHECK_THROWS_AS(path_loss_ldpl(0.0, p, 0.0), std::domain_error);
  CHECK_THROWS_AS(path_loss_ldpl(-1.0, p, 0.0), std::domain_error);
}

TEST_CASE("jammer rssi composes power, gains and path loss") {
  PropagationParams p;
  p.pl0_db = 40.0;
  p.gamma = 3.0;
  JammerConfig jam;
  jam.position = {0.0, 0.0};
  jam.tx_power_dbm = 30.0;

  // PL(100) = 100 dB with these parameters
  CHECK(jammer_rssi({100.0, 0.0}, jam, p, 0.0) == doctest::Approx(-70.0).epsilon(1e-12));

  jam.tx_power_dbm = 0.0;
  CHECK(jammer_rssi({1.0, 0.0}, jam, p, 0.0) == doctest::Approx(-40.0).epsilon(1e-12));
}

TEST_CASE("co-located device clamps to the minimum distance") {
  PropagationParams p;
  p.pl0_db = 40.0;
  p.gamma = 3.0;
  JammerConfig jam;
  jam.position = {10.0, 20.0};
  jam.tx_power_dbm = 30.0;
  // PL(0.1) = 40 - 30 = 10 dB
  CHECK(jammer_rssi(jam.position, jam, p, 0.0) == doctest::Approx(30.0 - 10.0).epsilon(1e-12));
}

TEST_CASE("noise floor composition in linear scale") {
  CHECK(noise_floor(-std::numeric_limits<double>::infinity()) ==
        doctest::Approx(-100.0).epsilon(1e-12));
  CHECK(noise_floor(-100.0) == doctest::Approx(-96.98970004336019).epsilon(1e-10));
  CHECK(noise_floor(-90.0) == doctest::Approx(-89.58607314841775).epsilon(1e-10));
}

TEST_CASE("noise floor decreases with distance and never drops below ambient") {
  PropagationParams p;
  p.gamma = 3.2;
  JammerConfig jam;
  jam.position = {0.0, 0.0};
  jam.tx_power_dbm = 45.0;
  double prev = std::numeric_limits<double>::infinity();
  for (double d = 0.2; d < 3000.0; d *= 1.3) {
    const double nf = noise_floor(jammer_rssi({d, 0.0}, jam, p, 0.0));
    CHECK(nf < prev);
    CHECK(nf >= kAmbientNoiseDbm);
    prev = nf;
  }
}

TEST_CASE("dbm round trip is the identity within 1e-9") {
  for (double dbm = -150.0; dbm <= 80.0; dbm += 0.7) {
    CHECK(mw_to_dbm(dbm_to_mw(dbm)) == doctest::Approx(dbm).epsilon(0).scale(1).epsilon(1e-9));
  }
}

TEST_CASE("seeded shadowing makes evaluation bit-identical") {
  PropagationParams p;
  p.sigma_db = 4.0;
  JammerConfig jam;
  jam.position = {0.0, 0.0};
  jam.tx_power_dbm = 40.0;

  auto run = [&] {
    Rng rng(1234);
    std::vector<double> out;
    for (int i = 0; i < 100; ++i) {
      out.push_back(noise_floor(jammer_rssi({50.0 + i, 10.0}, jam, p, rng.normal(0.0, p.sigma_db))));
    }
    return out;
  };
  CHECK(run() == run());
}
