#!/usr/bin/env python3
"""
Flask server exposing the cheap calculators (Janson bound, K(eps), C(n),
arithmetic functions) as a small JSON API.
"""

import logging
import math
import os
import time
from collections import defaultdict, deque

from flask import Flask, jsonify, request
from flask_cors import CORS

import config
from numtheory import SingularSeriesParams, is_squarefree, omega, phi, singular_series, tau
from randcomplement import janson_bound, k_of_eps

config.configure_logging()
logger = logging.getLogger(__name__)

app = Flask(__name__)

# Requests are tiny JSON bodies
app.config['MAX_CONTENT_LENGTH'] = 64 * 1024

PRODUCTION_ORIGINS = [
    origin.strip() for origin in os.getenv('ALLOWED_ORIGINS', '').split(',') if origin.strip()
]

# Add localhost only if running in development
IS_PRODUCTION = os.getenv('FLASK_ENV') == 'production'
ALLOWED_ORIGINS = PRODUCTION_ORIGINS if IS_PRODUCTION else PRODUCTION_ORIGINS + [
    "http://localhost:8000",
    "http://127.0.0.1:8000",
    "http://localhost:5500",
    "http://127.0.0.1:5500"
]

RATE_LIMIT_REQUESTS = int(os.getenv('RATE_LIMIT_REQUESTS', '30'))
RATE_LIMIT_WINDOW = int(os.getenv('RATE_LIMIT_WINDOW', '60'))

# Largest argument accepted by the arithmetic endpoints (trial division beyond SPF_LIMIT)
MAX_ARGUMENT = 10 ** 12

ARITH_FUNCTIONS = {"tau": tau, "phi": phi, "omega": omega, "squarefree": is_squarefree}

CORS(app,
     origins=ALLOWED_ORIGINS,
     methods=["GET", "POST"],
     allow_headers=["Content-Type"],
     supports_credentials=False
)


@app.after_request
def add_security_headers(response):
    """Add security headers to all responses."""
    response.headers['X-Content-Type-Options'] = 'nosniff'
    response.headers['X-Frame-Options'] = 'DENY'
    response.headers['Referrer-Policy'] = 'strict-origin-when-cross-origin'
    response.headers['Permissions-Policy'] = 'geolocation=(), microphone=(), camera=()'
    return response


# ---------------------
# Security and validation functions
# ---------------------

rate_limit_storage = defaultdict(deque)


def check_rate_limit(ip_address, max_requests=RATE_LIMIT_REQUESTS, window_seconds=RATE_LIMIT_WINDOW):
    """Simple rate limiting based on IP address"""
    now = time.time()
    requests = rate_limit_storage[ip_address]

    while requests and requests[0] <= now - window_seconds:
        requests.popleft()

    if len(requests) >= max_requests:
        return False

    requests.append(now)
    return True


def validate_request_origin():
    """Validate that the request comes from an allowed origin"""
    origin = request.headers.get('Origin')

    # In development or if no origin (e.g. direct call), allow it
    if not IS_PRODUCTION or not origin:
        return True

    if origin in ALLOWED_ORIGINS:
        return True

    logger.warning(f"CORS BLOCKED: Origin '{origin}' not in {ALLOWED_ORIGINS}")
    return False


def guard_request():
    """Origin and rate-limit checks shared by every calculator; returns an error response or None."""
    if not validate_request_origin():
        return jsonify({'error': 'Request origin not allowed'}), 403
    client_ip = request.environ.get('HTTP_X_FORWARDED_FOR', request.remote_addr)
    if not check_rate_limit(client_ip):
        return jsonify({'error': 'Rate limit exceeded'}), 429
    return None


def parse_number(source, name, kind=float, minimum=None, maximum=None):
    """
    Reads one numeric field.
    Returns (value, None) on success and (None, message) on failure.
    """
    raw = source.get(name) if source else None
    if raw is None or isinstance(raw, bool):
        return None, f"'{name}' is required"
    try:
        value = kind(raw)
    except (TypeError, ValueError):
        return None, f"'{name}' must be a {'integer' if kind is int else 'number'}"
    if kind is float and not math.isfinite(value):
        return None, f"'{name}' must be finite"
    if kind is int and isinstance(raw, float) and raw != value:
        return None, f"'{name}' must be an integer"
    if minimum is not None and value < minimum:
        return None, f"'{name}' must be at least {minimum}"
    if maximum is not None and value > maximum:
        return None, f"'{name}' must be at most {maximum}"
    return value, None


def parse_fields(source, specs):
    values = {}
    for name, kind, minimum, maximum in specs:
        value, error = parse_number(source, name, kind, minimum, maximum)
        if error:
            return None, error
        values[name] = value
    return values, None


# ---------------------
# Calculator endpoints
# ---------------------

@app.route('/api/janson', methods=['POST'])
def janson():
    blocked = guard_request()
    if blocked:
        return blocked
    data = request.get_json(silent=True)
    values, error = parse_fields(data, [("E", float, None, None), ("delta", float, None, None),
                                        ("eps", float, None, None)])
    if error:
        return jsonify({'error': error}), 400
    try:
        certificate = janson_bound(values["E"], values["delta"], values["eps"])
    except ValueError as e:
        return jsonify({'error': str(e)}), 400
    result = certificate.to_dict()
    result["exponent"] = certificate.exponent
    return jsonify(result)


@app.route('/api/k-of-eps', methods=['POST'])
def k_of_eps_endpoint():
    blocked = guard_request()
    if blocked:
        return blocked
    data = request.get_json(silent=True)
    values, error = parse_fields(data, [("eps", float, None, None), ("c0", float, None, None),
                                        ("cstar", float, None, None)])
    if error:
        return jsonify({'error': error}), 400
    try:
        K = k_of_eps(values["eps"], values["c0"], values["cstar"])
    except ValueError as e:
        return jsonify({'error': str(e)}), 400
    return jsonify({**values, "K": K})


@app.route('/api/singular-series', methods=['GET'])
def singular_series_endpoint():
    blocked = guard_request()
    if blocked:
        return blocked
    n, error = parse_number(request.args, "n", int, 2, MAX_ARGUMENT)
    if error:
        return jsonify({'error': error}), 400
    tol = 1e-9
    if request.args.get("tol") is not None:
        tol, error = parse_number(request.args, "tol", float, None, 1.0)
        if error:
            return jsonify({'error': error}), 400
    try:
        value = singular_series(n, SingularSeriesParams(tolerance=tol))
    except ValueError as e:
        return jsonify({'error': str(e)}), 400
    except Exception as e:
        logger.error(f"singular series failed for n={n}: {e}")
        return jsonify({'error': 'Internal error'}), 500
    return jsonify({"n": n, "tol": tol, "value": value})


@app.route('/api/arith', methods=['GET'])
def arith():
    blocked = guard_request()
    if blocked:
        return blocked
    fn = request.args.get("fn", "")
    if fn not in ARITH_FUNCTIONS:
        return jsonify({'error': f"'fn' must be one of {sorted(ARITH_FUNCTIONS)}"}), 400
    n, error = parse_number(request.args, "n", int, 1, MAX_ARGUMENT)
    if error:
        return jsonify({'error': error}), 400
    return jsonify({"fn": fn, "n": n, "value": ARITH_FUNCTIONS[fn](n)})


# ---------------------
# Health endpoint
# ---------------------

@app.route('/health', methods=['GET'])
def health():
    return jsonify({'status': 'healthy', 'version': config.VERSION})


# ---------------------
# Run server
# ---------------------

if __name__ == '__main__':
    port = int(os.getenv('PORT', 8000))
    logger.info(f"Starting prime complements calculator on port {port}...")
    app.run(host='0.0.0.0', port=port, debug=False)
