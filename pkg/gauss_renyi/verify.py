import logging
import platform
from datetime import datetime

import numpy as np
import scipy

from gauss_renyi import __version__
from gauss_renyi.errors import GaussRenyiError
from gauss_renyi.models.responses import VerificationResponse
from gauss_renyi.validators.suites import SUITES, run_suite

SUITE_NAMES = list(SUITES) + ["all"]


class Verification:
    def __init__(self, suite: str = "all"):
        if suite not in SUITE_NAMES:
            raise ValueError(f"Unknown suite {suite!r}; choose from {', '.join(SUITE_NAMES)}")
        self.verification_response = VerificationResponse(suite=suite)

    def generate(self) -> VerificationResponse:
        """Run the requested acceptance suites and collect every check"""

        suite = self.verification_response.suite
        logging.info(f"Starting verification suite {suite}")

        try:
            checks = run_suite(suite)
        except GaussRenyiError as e:
            return self._set_failure_response(type(e).__name__, str(e))

        failed = [check for check in checks if not check["passed"]]
        for check in failed:
            logging.error(
                f"Check {check['suite']}/{check['name']} failed: value {check['value']} vs tolerance {check['tolerance']}"
            )

        self.verification_response.checks = checks
        self.verification_response.passed = len(checks) - len(failed)
        self.verification_response.failed = len(failed)
        self.verification_response.valid = not failed
        self.verification_response.metadata = self._metadata()

        logging.info(
            f"Verification {'passed' if not failed else 'failed'}: "
            f"{self.verification_response.passed}/{len(checks)} checks"
        )
        return self.verification_response

    def _metadata(self) -> dict:
        return {
            "tool_version": __version__,
            "python": platform.python_version(),
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "validation_timestamp": datetime.now().isoformat(),
        }

    def _set_failure_response(self, reason: str, message: str) -> VerificationResponse:
        """A suite aborted on a library error: record it as a single failed check"""

        self.verification_response.valid = False
        self.verification_response.passed = 0
        self.verification_response.failed = 1
        self.verification_response.checks = [
            {"name": "suite_aborted", "suite": self.verification_response.suite, "passed": False, "error": f"{reason}: {message}"}
        ]
        self.verification_response.metadata = self._metadata()

        logging.error(f"Verification aborted: {reason}: {message}")
        return self.verification_response
