# Copyright (c) 2026 fairbeam contributors
# SPDX-License-Identifier: Apache-2.0
from fairbeam._core import *  # noqa: F401,F403
