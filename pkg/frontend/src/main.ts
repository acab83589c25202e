import { ApiClient } from './api.js';
import { TriageApp } from './app.js';

const root = document.getElementById('app');
if (!root) {
  throw new Error('missing #app mount point');
}

// same-origin by default; the service serves this bundle itself
const app = new TriageApp(root, new ApiClient(''));
void app.start();
