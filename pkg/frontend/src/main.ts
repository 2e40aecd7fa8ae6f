/** Entry point: wire the API client, the controller and the DOM together.
 *
 * The backend origin defaults to the local serve port and can be overridden
 * with ?api=http://host:port for a checkpoint served elsewhere.
 */

import { ApiClient } from './api.js';
import { Controller } from './controller.js';
import { DomView, GALLERY_N } from './ui.js';

const DEFAULT_API = 'http://127.0.0.1:8765';

const root = document.querySelector<HTMLDivElement>('#app');
if (!root) throw new Error('missing #app element');

const apiBase =
  new URLSearchParams(window.location.search).get('api') ?? DEFAULT_API;
const api = new ApiClient(apiBase);
const view = new DomView(root);
const controller = new Controller(api, view);
view.bind(controller);
view.setApiTarget(apiBase);

// initial draw; failures (backend down, checkpoint loading) land in the
// inline error banner through the controller's normal error path
void controller.drawGallery(GALLERY_N);
