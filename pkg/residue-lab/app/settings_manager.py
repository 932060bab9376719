"""
Settings Manager für residue-lab
Verwaltet lokale Laufzeit-Einstellungen (Radien, Präzision, Toleranzen)
"""

import json
import logging
import os
from fractions import Fraction
from typing import Dict, Any, Optional

import voluptuous as vol

DEFAULT_SETTINGS: Dict[str, Any] = {
    'threads': 1,
    'precision_bits': 256,
    'log_level': 'info',
    'tol_scale': 1.0,
    'inner_radius': 32,
    'padded_radius': 64,
    'zeta_head_radius': 32,
    'zeta_tail_tol': 1e-13,
    'quadrature_nodes': 64,
    'gauss_nodes': 8,
    'richardson_levels': 3,
    'richardson_step': '1/16',
    'random_seed': 20240901,
}

# Environment Variables haben Vorrang vor der Datei
ENV_OVERRIDES = {
    'RES_LAB_THREADS': 'threads',
    'RES_LAB_PRECISION_BITS': 'precision_bits',
    'LOG_LEVEL': 'log_level',
}


def _step(value: Any) -> str:
    try:
        step = Fraction(str(value))
    except (ValueError, ZeroDivisionError):
        raise vol.Invalid(f"Schrittweite ist kein Bruch: {value!r}")
    if step <= 0:
        raise vol.Invalid(f"Schrittweite muss positiv sein: {value}")
    return str(step)


SETTINGS_SCHEMA = vol.Schema({
    vol.Optional('threads'): vol.All(vol.Coerce(int), vol.Range(min=1, max=256)),
    vol.Optional('precision_bits'): vol.All(vol.Coerce(int), vol.Range(min=64, max=4096)),
    vol.Optional('log_level'): vol.All(str, vol.Lower, vol.In(['debug', 'info', 'warning', 'error'])),
    vol.Optional('tol_scale'): vol.All(vol.Coerce(float), vol.Range(min=0, min_included=False)),
    vol.Optional('inner_radius'): vol.All(vol.Coerce(int), vol.Range(min=4)),
    vol.Optional('padded_radius'): vol.All(vol.Coerce(int), vol.Range(min=4)),
    vol.Optional('zeta_head_radius'): vol.All(vol.Coerce(int), vol.Range(min=1)),
    vol.Optional('zeta_tail_tol'): vol.All(vol.Coerce(float), vol.Range(min=0, min_included=False)),
    vol.Optional('quadrature_nodes'): vol.All(vol.Coerce(int), vol.Range(min=2)),
    vol.Optional('gauss_nodes'): vol.All(vol.Coerce(int), vol.Range(min=1)),
    vol.Optional('richardson_levels'): vol.All(vol.Coerce(int), vol.Range(min=1, max=8)),
    vol.Optional('richardson_step'): _step,
    vol.Optional('random_seed'): vol.All(vol.Coerce(int), vol.Range(min=0)),
}, extra=vol.REMOVE_EXTRA)


def default_settings_path() -> str:
    path = os.getenv('RES_LAB_SETTINGS')
    if path:
        return path
    # Persistente Speicherung in /data im Container
    if os.path.exists('/data'):
        return '/data/settings.json'
    return 'settings.json'


class SettingsManager:
    """Verwaltet residue-lab Einstellungen."""

    def __init__(self, config_file: Optional[str] = None, apply_env: bool = True):
        """Initialisiere Settings Manager."""
        self.config_file = config_file or default_settings_path()
        self.apply_env = apply_env
        self.settings: Dict[str, Any] = {}
        self.load_settings()

    def validate(self, values: Dict[str, Any]) -> Dict[str, Any]:
        """Prüfe Werte gegen das Schema; wirft vol.Invalid bei Fehlern."""
        return SETTINGS_SCHEMA(dict(values))

    def _env_overrides(self) -> Dict[str, Any]:
        overrides = {}
        for env, key in ENV_OVERRIDES.items():
            raw = os.getenv(env)
            if raw is None or raw == '':
                continue
            try:
                overrides.update(self.validate({key: raw}))
            except vol.Invalid as e:
                logging.warning(f"Ignoriere ungültige Umgebungsvariable {env}={raw!r}: {e}")
        return overrides

    def load_settings(self):
        """Lade Einstellungen aus Datei, Standardwerte für alles Fehlende."""
        self.settings = dict(DEFAULT_SETTINGS)
        try:
            if os.path.exists(self.config_file):
                with open(self.config_file, 'r') as f:
                    stored = json.load(f)
                if not isinstance(stored, dict):
                    raise ValueError("Einstellungsdatei enthält kein JSON-Objekt")
                self.settings.update(self.validate(stored))
                logging.info(f"Einstellungen geladen: {self.config_file}")
            else:
                logging.info("Keine Einstellungsdatei gefunden, verwende Standard-Einstellungen")
        except (OSError, ValueError, vol.Invalid) as e:
            logging.error(f"Fehler beim Laden der Einstellungen: {e}")
            # Fallback zu Standard-Einstellungen
            self.settings = dict(DEFAULT_SETTINGS)
        if self.apply_env:
            self.settings.update(self._env_overrides())

    def save_settings(self) -> bool:
        """Speichere Einstellungen in Datei."""
        try:
            if os.path.dirname(self.config_file):
                os.makedirs(os.path.dirname(self.config_file), exist_ok=True)

            with open(self.config_file, 'w') as f:
                json.dump(self.settings, f, indent=2)
            logging.info("Einstellungen gespeichert")
            return True
        except OSError as e:
            logging.error(f"Fehler beim Speichern der Einstellungen: {e}")
            return False

    def get_setting(self, key: str, default=None):
        """Hole einzelne Einstellung."""
        return self.settings.get(key, default)

    def set_setting(self, key: str, value: Any) -> bool:
        """Setze einzelne Einstellung."""
        return self.update_settings({key: value})

    def update_settings(self, new_settings: Dict[str, Any]) -> bool:
        """Aktualisiere mehrere Einstellungen; ungültige Werte werden abgewiesen."""
        unknown = set(new_settings) - set(DEFAULT_SETTINGS)
        if unknown:
            logging.error(f"Unbekannte Einstellungen: {', '.join(sorted(unknown))}")
            return False
        try:
            self.settings.update(self.validate(new_settings))
        except vol.Invalid as e:
            logging.error(f"Ungültige Einstellung: {e}")
            return False
        return self.save_settings()

    def get_all_settings(self) -> Dict[str, Any]:
        """Hole alle Einstellungen."""
        return self.settings.copy()

    def reset_to_defaults(self) -> bool:
        """Setze auf Standard-Einstellungen zurück."""
        self.settings = dict(DEFAULT_SETTINGS)
        return self.save_settings()
