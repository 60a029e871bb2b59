#include "qelim.h"

#include "errors.hpp"
#include "polyalg.hpp"

#include <cstdlib>
#include <fstream>
#include <new>
#include <sstream>

using namespace qelim;

struct qe_engine {
  QeOptions opts;
  bool extended_output = true;
  std::string last_error;
};

struct qe_result {
  std::string formula;
  std::string stats;
  std::string witness;
  bool has_witness = false;
  bool unverified = false;
};

extern "C" {

qe_engine *qe_engine_new(void) { return new (std::nothrow) qe_engine; }

void qe_engine_free(qe_engine *e) { delete e; }

qe_status qe_engine_set(qe_engine *e, const char *key, const char *value) {
  if (!e || !key || !value)
    return QE_BAD_OPTION;
  std::string k = key, v = value;
  try {
    if (k == "mode") {
      e->opts.mode = qe_mode_from(v);
    } else if (k == "ordering") {
      if (v.rfind("user:", 0) == 0) {
        e->opts.ordering = OrderStrategy::User;
        e->opts.user_order.clear();
        std::stringstream ss(v.substr(5));
        std::string name;
        while (std::getline(ss, name, ','))
          if (!name.empty())
            e->opts.user_order.push_back(Var::named(name));
        if (e->opts.user_order.empty())
          throw std::invalid_argument("empty user order");
      } else if (v == "brown") {
        e->opts.ordering = OrderStrategy::Brown;
      } else if (v == "sotd") {
        e->opts.ordering = OrderStrategy::Sotd;
      } else if (v == "ndrr") {
        e->opts.ordering = OrderStrategy::Ndrr;
      } else if (v == "greedy") {
        e->opts.ordering = OrderStrategy::Greedy;
      } else if (v == "ec") {
        e->opts.ordering = OrderStrategy::Ec;
      } else {
        throw std::invalid_argument("unknown ordering: " + v);
      }
    } else if (k == "traversal") {
      e->opts.traversal = traversal_from(v);
    } else if (k == "ec") {
      e->opts.ec_mode = ec_mode_from(v);
    } else if (k == "share-threshold") {
      size_t pos = 0;
      double t = std::stod(v, &pos);
      if (pos != v.size() || t < 0.0 || t > 1.0)
        throw std::invalid_argument("share threshold outside [0,1]");
      e->opts.share_threshold = t;
    } else if (k == "groebner") {
      if (v != "on" && v != "off")
        throw std::invalid_argument("expected on or off");
      e->opts.groebner = v == "on";
    } else if (k == "witness") {
      if (v != "on" && v != "off")
        throw std::invalid_argument("expected on or off");
      e->opts.want_witness = v == "on";
    } else if (k == "timeout") {
      size_t pos = 0;
      double t = std::stod(v, &pos);
      if (pos != v.size() || t < 0.0)
        throw std::invalid_argument("negative timeout");
      e->opts.timeout_sec = t;
    } else if (k == "output") {
      if (v != "tarski" && v != "extended")
        throw std::invalid_argument("expected tarski or extended");
      e->extended_output = v == "extended";
    } else {
      e->last_error = "unknown option: " + k;
      return QE_BAD_OPTION;
    }
  } catch (std::exception &ex) {
    e->last_error = std::string("bad value for ") + k + ": " + ex.what();
    return QE_BAD_OPTION;
  }
  // ordering interactions: the greedy strategy reorders per projection step,
  // which the basis replacement of the preprocessor invalidates
  if (e->opts.groebner && e->opts.ordering == OrderStrategy::Greedy) {
    e->last_error = "groebner preprocessing cannot be combined with greedy ordering";
    return QE_BAD_OPTION;
  }
  return QE_OK;
}

const char *qe_last_error(const qe_engine *e) {
  return e ? e->last_error.c_str() : "null engine";
}

qe_status qe_run(qe_engine *e, const char *problem, qe_result **out) {
  if (out)
    *out = nullptr;
  if (!e)
    return QE_ERROR;
  if (!problem || !out) {
    e->last_error = "null argument";
    return QE_ERROR;
  }
  try {
    FormulaPtr f = parse_formula(problem);
    QeResult res = qe(f, e->opts);
    if (!e->extended_output && contains_ext(res.solution)) {
      e->last_error = "result contains indexed-root atoms; rerun with extended output";
      return QE_UNSUPPORTED;
    }
    auto r = std::make_unique<qe_result>();
    r->formula = print_formula(res.solution);
    r->stats = res.stats.to_json();
    r->unverified = res.unverified;
    if (res.witness) {
      std::string w;
      for (auto &[v, val] : res.witness->assignment) {
        if (!w.empty())
          w += "\n";
        w += "(" + v.name() + " " + val.to_sexpr() + ")";
      }
      r->witness = std::move(w);
      r->has_witness = true;
    }
    *out = r.release();
    return (*out)->unverified ? QE_UNVERIFIED : QE_OK;
  } catch (ParseError &ex) {
    e->last_error = ex.what();
    return QE_PARSE_ERROR;
  } catch (TimeoutError &ex) {
    e->last_error = ex.what();
    return QE_TIMEOUT;
  } catch (UnsupportedError &ex) {
    e->last_error = ex.what();
    return QE_UNSUPPORTED;
  } catch (std::exception &ex) {
    e->last_error = ex.what();
    return QE_ERROR;
  }
}

qe_status qe_run_file(qe_engine *e, const char *path, qe_result **out) {
  if (out)
    *out = nullptr;
  if (!e)
    return QE_ERROR;
  if (!path || !out) {
    e->last_error = "null argument";
    return QE_ERROR;
  }
  std::ifstream in(path);
  if (!in) {
    e->last_error = std::string("cannot read ") + path;
    return QE_ERROR;
  }
  std::stringstream ss;
  ss << in.rdbuf();
  std::string text = ss.str();
  return qe_run(e, text.c_str(), out);
}

const char *qe_result_formula(const qe_result *r) {
  return r ? r->formula.c_str() : nullptr;
}

const char *qe_result_stats_json(const qe_result *r) {
  return r ? r->stats.c_str() : nullptr;
}

const char *qe_result_witness(const qe_result *r) {
  return r && r->has_witness ? r->witness.c_str() : nullptr;
}

int qe_result_unverified(const qe_result *r) { return r && r->unverified ? 1 : 0; }

void qe_result_free(qe_result *r) { delete r; }

} // extern "C"
