/** Browser entry point: wire the app against the service origin. */

import { ApiClient } from './api.js';
import { initApp } from './main.js';

const params = new URLSearchParams(window.location.search);
const baseUrl = params.get('service') ?? 'http://127.0.0.1:8000';

const api = new ApiClient(baseUrl);
initApp(document, api);

api
  .health()
  .then((h) => {
    const el = document.getElementById('service-info');
    if (el) {
      el.textContent = h.bundle ? `service ok, bundle ${h.bundle}` : 'service up, no bundle loaded';
    }
  })
  .catch(() => {
    const el = document.getElementById('service-info');
    if (el) {
      el.textContent = `service unreachable at ${baseUrl} (append ?service=http://host:port to override)`;
    }
  });
