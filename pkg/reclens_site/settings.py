"""
Django settings for the reclens project.

Everything is read from the environment. The project has no database and no
user accounts: the CLI works on log files and the JSON API reads logs from
RECLENS_LOG_DIR.

For the full list of settings and their values, see
https://docs.djangoproject.com/en/4.2/ref/settings/
"""

import os
from pathlib import Path

from django.core.management.utils import get_random_secret_key

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent


# Nothing is signed persistently, so a throwaway key is fine when unset.
SECRET_KEY = os.environ.get("SECRET_KEY") or get_random_secret_key()

# SECURITY WARNING: don't run with debug turned on in production!
DEBUG = os.environ.get("DEBUG", "False") == "True"

ALLOWED_HOSTS = [
    host.strip()
    for host in os.environ.get("ALLOWED_HOSTS", "localhost,127.0.0.1").split(",")
    if host.strip()
]


# Application definition

INSTALLED_APPS = [
    "reclens",
]

MIDDLEWARE = [
    "django.middleware.security.SecurityMiddleware",
    "django.middleware.common.CommonMiddleware",
    "django.middleware.clickjacking.XFrameOptionsMiddleware",
]

ROOT_URLCONF = "reclens_site.urls"

TEMPLATES = []

WSGI_APPLICATION = "reclens_site.wsgi.application"


# No database: logs are files.
DATABASES = {}


CACHES = {
    "default": {
        "BACKEND": "django.core.cache.backends.locmem.LocMemCache",
        "LOCATION": "reclens",
    }
}


# Internationalization
# https://docs.djangoproject.com/en/4.2/topics/i18n/

LANGUAGE_CODE = "en-us"

TIME_ZONE = "UTC"

USE_I18N = False

USE_TZ = True


# Evaluation defaults

# 0 or empty: use every core joblib reports
RECLENS_THREADS = int(os.environ.get("RECLENS_THREADS") or 0)
RECLENS_TZ_OFFSET = os.environ.get("RECLENS_TZ_OFFSET", "+00:00")
RECLENS_BOUNCE_THRESHOLD = float(os.environ.get("RECLENS_BOUNCE_THRESHOLD", "1.5"))
RECLENS_LOG_DIR = Path(os.environ.get("RECLENS_LOG_DIR", BASE_DIR / "logs"))
RECLENS_REPORT_CACHE_SECONDS = int(os.environ.get("RECLENS_REPORT_CACHE_SECONDS", "3600"))
RECLENS_LOG_LEVEL = os.environ.get("RECLENS_LOG_LEVEL", "INFO").upper()


# Logging goes to stderr; stdout carries command output.

LOGGING = {
    "version": 1,
    "disable_existing_loggers": False,
    "formatters": {
        "plain": {
            "format": "%(asctime)s %(levelname)s %(name)s: %(message)s",
        },
    },
    "handlers": {
        "stderr": {
            "class": "logging.StreamHandler",
            "stream": "ext://sys.stderr",
            "formatter": "plain",
        },
    },
    "loggers": {
        "reclens": {
            "handlers": ["stderr"],
            "level": RECLENS_LOG_LEVEL,
            "propagate": False,
        },
        "django": {
            "handlers": ["stderr"],
            "level": "WARNING",
        },
    },
}
