#include <CLI11.hpp>

#include <filesystem>
#include <iostream>

#include "periodforge/geometry.hpp"
#include "periodforge/pipeline.hpp"

namespace pf = periodforge;

namespace {

struct Flags {
  std::string family;
  int n = 0;
  int m = 0;
  int precision = 30;
  std::string pin;
  std::string schedule;
  std::string seed = "default";
  std::string out;
  std::string record;
  int maxPrecision = 120;
  bool verbose = false;
  // mesh
  int radial = 32;
  int angular = 32;
  double truncation = 1e3;
  // flat
  std::string form = "gdh";
};

pf::FamilySpec specFrom(const Flags& f) {
  if (f.family.empty()) throw pf::ConfigError("--family is required");
  pf::FamilySpec s{pf::parseKind(f.family), f.n, f.m};
  pf::validateSpec(s);
  return s;
}

pf::SolveOptions solveOptions(const Flags& f) {
  pf::SolveOptions o;
  o.initialPrecision = f.precision;
  o.maxPrecision = std::max(f.maxPrecision, f.precision);
  if (f.verbose) o.log = [](const std::string& s) { std::cerr << s << "\n"; };
  return o;
}

void writeRecord(const pf::SolutionRecord& r, const std::string& out) {
  if (out.empty() || out == "-") {
    std::cout << pf::serialize(r);
    return;
  }
  pf::save(r, out);
  std::cerr << "wrote " << out << "\n";
}

int runSolve(const Flags& f) {
  const auto spec = specFrom(f);
  const pf::Precision p(f.precision);
  auto seed = pf::seedFromSource(spec, f.seed, p);
  auto opts = solveOptions(f);
  if (!f.pin.empty()) {
    const auto eq = f.pin.find('=');
    if (eq == std::string::npos) throw pf::ConfigError("--pin expects NAME=VALUE");
    opts.pinName = f.pin.substr(0, eq);
    const std::string v = f.pin.substr(eq + 1);
    if (!pf::isDecimal(v)) throw pf::ConfigError("--pin value is not a decimal: '" + v + "'");
    opts.pinValue = pf::PrecReal(std::string_view(v), pf::Precision(std::max(f.precision, 30)));
  }
  const auto sol = pf::solvePeriodProblem(spec, seed, opts);
  std::cerr << pf::describe(spec) << ": residual " << pf::toString(sol.residualNorm, 4) << " after " << sol.iterations
            << " iterations at " << sol.precisionUsed << " digits\n";
  writeRecord(pf::recordFromSolution(sol), f.out);
  return 0;
}

int runVerify(const Flags& f) {
  if (f.record.empty()) throw pf::ConfigError("verify needs --record PATH|bundled:NAME");
  const auto r = pf::recordFromSource(f.record);
  const auto c = pf::certify(r);
  std::cout << "record " << (r.name.empty() ? f.record : r.name) << " (" << pf::describe(r.spec) << ")\n";
  std::cout << "evaluated at " << c.evaluationDigits << " digits, tolerance " << c.tolerance << "\n";
  for (size_t i = 0; i < c.points.size(); ++i) {
    const auto& v = c.points[i];
    std::cout << "point " << i << ": " << (v.pass ? "PASS" : "FAIL") << " max residual "
              << (v.maxResidual.empty() ? "n/a" : v.maxResidual) << " (" << v.message << ")\n";
  }
  if (!r.certifying) std::cout << "note: record is marked non-certifying\n";
  for (const auto& n : r.notes) std::cout << "note: " << n << "\n";
  std::cout << "verdict " << (c.pass() ? "PASS" : "FAIL") << "\n";
  return c.pass() ? 0 : 1;
}

int runSweep(const Flags& f) {
  const auto spec = specFrom(f);
  if (!pf::isParallel(spec.kind)) throw pf::ConfigError("sweep needs a parallel-end family");
  if (f.schedule.empty()) throw pf::ConfigError("sweep needs --schedule FILE");
  if (f.out.empty()) throw pf::ConfigError("sweep needs --out DIR");
  const pf::Precision p(f.precision);
  const auto schedule = pf::parseSchedule(pf::readFile(f.schedule), pf::Precision(std::max(f.precision, 30)));
  const std::string pinName = f.pin.empty() ? "a1" : f.pin;
  if (pinName.find('=') != std::string::npos) throw pf::ConfigError("sweep takes --pin NAME; values come from the schedule");
  auto seed = pf::seedFromSource(spec, f.seed, p);
  const auto br = pf::continueFamily(spec, pinName, schedule, seed, solveOptions(f));
  std::filesystem::create_directories(f.out);
  for (size_t i = 0; i < br.solutions.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "point_%03zu.json", i);
    auto r = pf::recordFromSolution(br.solutions[i]);
    pf::save(r, std::filesystem::path(f.out) / name);
    std::cerr << pinName << " = " << br.solutions[i].pinnedValue << ": residual "
              << pf::toString(br.solutions[i].residualNorm, 4) << "\n";
  }
  std::cerr << "wrote " << br.solutions.size() << " of " << schedule.size() << " records to " << f.out << "\n";
  if (br.failure) {
    std::cerr << "branch stopped: " << *br.failure << "\n";
    return 1;
  }
  return 0;
}

// Weierstrass data for mesh/flat: from a record, or from the family's seed.
pf::FamilyInstance surfaceFrom(const Flags& f, pf::Precision p) {
  if (!f.record.empty()) {
    const auto r = pf::recordFromSource(f.record);
    return pf::instantiate(r.spec, pf::pointParams(r, pf::variableNames(r.spec), p), p);
  }
  const auto spec = specFrom(f);
  return pf::instantiate(spec, pf::seedFromSource(spec, f.seed, p), p);
}

int runMesh(const Flags& f) {
  if (f.out.empty()) throw pf::ConfigError("mesh needs --out PATH");
  const pf::Precision p(f.precision);
  const auto inst = surfaceFrom(f, p);
  pf::GridOptions g;
  g.radialSamples = f.radial;
  g.angularSamples = f.angular;
  g.truncationRadius = f.truncation;
  g.digits = f.precision;
  if (g.radialSamples < 4 || g.angularSamples < 4) throw pf::ConfigError("grid needs at least 4 samples per direction");
  const auto m = pf::buildMesh(inst.wd, g);
  pf::writeObj(m, f.out);
  std::cerr << "wrote " << f.out << ": seam defect " << pf::seamDefect(m) << ", end normal defect "
            << pf::endNormalDefect(m) << "\n";
  return 0;
}

int runFlat(const Flags& f) {
  if (f.out.empty()) throw pf::ConfigError("flat needs --out PREFIX");
  const pf::Precision p(f.precision);
  const auto inst = surfaceFrom(f, p);
  pf::FormKind form;
  if (f.form == "gdh") form = pf::FormKind::GDH;
  else if (f.form == "invgdh") form = pf::FormKind::INVGDH;
  else throw pf::ConfigError("--form must be gdh or invgdh");
  const auto poly = pf::developFlat(inst.wd, form, p);
  pf::writeFlatSvg(poly, f.out + ".svg");
  pf::writeFlatVertices(poly, f.out + ".txt");
  std::cerr << "wrote " << f.out << ".svg and " << f.out << ".txt; closure " << pf::toString(poly.closure, 3) << "\n";
  return 0;
}

void familyFlags(CLI::App* c, Flags& f) {
  c->add_option("--family", f.family, "family kind, e.g. type34, par4n2, typemn");
  c->add_option("--n", f.n, "family index n");
  c->add_option("--m", f.m, "first index for typemn");
  c->add_option("--seed", f.seed, "default | paper | file:PATH");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"periodforge: period problems and geometry of doubly periodic minimal surfaces"};
  app.set_config("--config", "", "TOML/INI file supplying any flag");
  app.require_subcommand(1);
  app.fallthrough();
  Flags f;
  app.add_option("--precision", f.precision, "working precision in decimal digits");
  app.add_flag("-v,--verbose", f.verbose, "progress on stderr");

  auto* solve = app.add_subcommand("solve", "solve the period problem and write a record");
  familyFlags(solve, f);
  solve->add_option("--pin", f.pin, "NAME=VALUE held fixed");
  solve->add_option("--max-precision", f.maxPrecision, "precision ceiling for escalation");
  solve->add_option("--out", f.out, "record path (stdout when omitted)");

  auto* verify = app.add_subcommand("verify", "recompute residuals for a record");
  verify->add_option("--record", f.record, "PATH or bundled:NAME")->required();

  auto* sweep = app.add_subcommand("sweep", "continue a parallel-end family over a pin schedule");
  familyFlags(sweep, f);
  sweep->add_option("--pin", f.pin, "pinned variable name (default a1)");
  sweep->add_option("--schedule", f.schedule, "file with one pin value per line");
  sweep->add_option("--max-precision", f.maxPrecision, "precision ceiling for escalation");
  sweep->add_option("--out", f.out, "output directory");

  auto* mesh = app.add_subcommand("mesh", "export a fundamental-piece mesh as OBJ");
  familyFlags(mesh, f);
  mesh->add_option("--record", f.record, "PATH or bundled:NAME instead of --family");
  mesh->add_option("--radial", f.radial, "radial samples");
  mesh->add_option("--angular", f.angular, "angular samples");
  mesh->add_option("--truncation", f.truncation, "end truncation radius");
  mesh->add_option("--out", f.out, "OBJ path");

  auto* flat = app.add_subcommand("flat", "develop the flat structure as SVG plus a vertex list");
  familyFlags(flat, f);
  flat->add_option("--record", f.record, "PATH or bundled:NAME instead of --family");
  flat->add_option("--form", f.form, "gdh | invgdh");
  flat->add_option("--out", f.out, "output prefix");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*solve) return runSolve(f);
    if (*verify) return runVerify(f);
    if (*sweep) return runSweep(f);
    if (*mesh) return runMesh(f);
    if (*flat) return runFlat(f);
  } catch (const pf::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const pf::ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return 2;
  } catch (const pf::IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 2;
  } catch (const pf::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
