import { App, defaultConfig } from './app';
import './style.css';

const root = document.getElementById('app');
if (!root) throw new Error('missing #app mount point');

const app = new App(root, defaultConfig());
void app.start();
